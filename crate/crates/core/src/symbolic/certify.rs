//! Exact certification of the algebraic identities behind the construction.
//!
//! Every check builds a residual polynomial that must vanish identically.
//! Residuals are put in normal form (even powers of `g` asserted, then
//! `g² → h⁻¹k`) and the check passes only when the term map is empty.

use serde::Serialize;

use super::jet::{
    d_theta_vec, det3, gram_displayed, gram_from_vectors, jet_symbols, plucker_sym, q_form_sym,
    wedge_form_sym, JetSymbols, PolyPlucker, PolyVec4,
};
use super::poly::{GaussRat, LaurentPoly, Symbol};
use crate::error::SymbolicError;
use Symbol::*;

/// The identities the engine certifies. Names double as fault-injection keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    UnitStructure,
    MetricEntries,
    DetG,
    VolumeIntegrand,
    FiberGeodesic,
    GaussMap,
    DominationLemma,
}

impl Identity {
    pub const ALL: [Identity; 7] = [
        Identity::UnitStructure,
        Identity::MetricEntries,
        Identity::DetG,
        Identity::VolumeIntegrand,
        Identity::FiberGeodesic,
        Identity::GaussMap,
        Identity::DominationLemma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::UnitStructure => "unit-structure",
            Identity::MetricEntries => "metric-entries",
            Identity::DetG => "det-g",
            Identity::VolumeIntegrand => "volume-integrand",
            Identity::FiberGeodesic => "fiber-geodesic",
            Identity::GaussMap => "gauss-map",
            Identity::DominationLemma => "domination-lemma",
        }
    }

    pub fn from_name(s: &str) -> Option<Identity> {
        Identity::ALL.into_iter().find(|i| i.name() == s)
    }

    pub fn claim(self) -> &'static str {
        match self {
            Identity::UnitStructure => "Q(s,s) = 1, Q(s_theta,s_theta) = 1, Q(s,s_theta) = 0",
            Identity::MetricEntries => {
                "Gram entries of (s_z, s_zbar, s_theta): Q(s_z,s_z) = -XY + c^2 and the five others"
            }
            Identity::DetG => "det G = -1/4 (XW - YZ)^2",
            Identity::VolumeIntegrand => {
                "theta-average of XW - YZ is (|a|^2 k^-2 - |b|^2 k^2) + (|c|^2 h^-2 - |d|^2 h^2)"
            }
            Identity::FiberGeodesic => "d/dtheta s = s_theta and d/dtheta s_theta = -s",
            Identity::GaussMap => {
                "f_z = (2ia, -2ic, 0, 0, -2id, 2ib) and f_z ^ f_z = -8(ab - cd)"
            }
            Identity::DominationLemma => {
                "|u X + ubar Z| balance reduces to g_1(V,V) = g_2(V,V) for V = u d/dz + ubar d/dzbar"
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual_terms: usize,
    /// Rendered residual; empty when certified.
    pub residual: String,
}

/// Our minor ordering mapped onto the tuple displayed for `f_z`.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingDictionary {
    pub ours: [&'static str; 6],
    /// `displayed_slot[i]` is the position in the displayed tuple that our
    /// minor `i` occupies.
    pub displayed_slot: [usize; 6],
    pub sign: i32,
    pub orientation: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub identity: Identity,
    pub claim: &'static str,
    pub certified: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering: Option<OrderingDictionary>,
}

impl Certificate {
    fn new(identity: Identity) -> Self {
        Certificate {
            identity,
            claim: identity.claim(),
            certified: true,
            checks: Vec::new(),
            ordering: None,
        }
    }

    fn check(&mut self, name: &str, residual: LaurentPoly) -> Result<(), SymbolicError> {
        let normal = residual.normal_form(name)?;
        let ok = normal.is_zero();
        self.certified &= ok;
        self.checks.push(Check {
            name: name.to_string(),
            residual_terms: normal.term_count(),
            residual: if ok { String::new() } else { normal.to_string() },
        });
        Ok(())
    }

    /// Vector checks: the residual may carry odd `g` powers componentwise,
    /// so only the rewrite is applied.
    fn check_vector(&mut self, name: &str, residual: &[LaurentPoly]) {
        let normal: Vec<LaurentPoly> = residual.iter().map(|p| p.reduce_g()).collect();
        let terms: usize = normal.iter().map(|p| p.term_count()).sum();
        let ok = terms == 0;
        self.certified &= ok;
        let rendered = if ok {
            String::new()
        } else {
            normal
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(i, p)| format!("[{i}] {p}"))
                .collect::<Vec<_>>()
                .join("; ")
        };
        self.checks.push(Check {
            name: name.to_string(),
            residual_terms: terms,
            residual: rendered,
        });
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.residual_terms > 0)
    }
}

fn m(p: &[(Symbol, i32)]) -> LaurentPoly {
    LaurentPoly::monomial(p)
}

fn gauss(re: i64, im: i64) -> GaussRat {
    GaussRat::gaussian(re, im)
}

fn sub_vec(u: &PolyVec4, v: &PolyVec4) -> Vec<LaurentPoly> {
    (0..4).map(|i| &u[i] - &v[i]).collect()
}

/// The jet with a deliberate fault planted for the named identity.
pub fn mutated_jet(identity: Identity) -> JetSymbols {
    let mut j = jet_symbols();
    match identity {
        // flip the sign of Y inside s_z, leaving the displayed scalar alone
        Identity::MetricEntries | Identity::DetG | Identity::GaussMap => {
            j.s_z[3] = -&j.s_z[3];
        }
        Identity::VolumeIntegrand => j.y = -&j.y,
        Identity::FiberGeodesic | Identity::UnitStructure => {
            j.s_theta[2] = -&j.s_theta[2];
        }
        Identity::DominationLemma => {}
    }
    j
}

pub fn certify_unit_structure(jet: &JetSymbols) -> Result<Certificate, SymbolicError> {
    let mut cert = Certificate::new(Identity::UnitStructure);
    let one = LaurentPoly::one();
    cert.check("Q(s,s) - 1", &q_form_sym(&jet.s, &jet.s) - &one)?;
    cert.check("Q(s_theta,s_theta) - 1", &q_form_sym(&jet.s_theta, &jet.s_theta) - &one)?;
    cert.check("Q(s,s_theta)", q_form_sym(&jet.s, &jet.s_theta))?;
    Ok(cert)
}

pub fn certify_metric_entries(jet: &JetSymbols) -> Result<Certificate, SymbolicError> {
    let mut cert = Certificate::new(Identity::MetricEntries);
    let computed = gram_from_vectors(jet);
    let displayed = gram_displayed(jet);
    let labels = ["z", "zbar", "theta"];
    for (i, j) in [(2, 2), (0, 2), (1, 2), (0, 0), (1, 1), (0, 1)] {
        let name = format!("Q(s_{}, s_{}) - displayed", labels[i], labels[j]);
        cert.check(&name, &computed[i][j] - &displayed[i][j])?;
    }
    Ok(cert)
}

fn minus_quarter_square(x: &LaurentPoly) -> LaurentPoly {
    (x * x).scale(&GaussRat::ratio(-1, 4))
}

pub fn certify_det_g(jet: &JetSymbols) -> Result<Certificate, SymbolicError> {
    let mut cert = Certificate::new(Identity::DetG);
    let det = det3(&gram_from_vectors(jet));
    let xw = &jet.x * &jet.w;
    let yz = &jet.y * &jet.z;
    let target = minus_quarter_square(&(&xw - &yz));
    let residual = &det - &target;
    cert.check("det G + 1/4 (XW - YZ)^2", residual.clone())?;

    // b = d = 0: det G = -1/4 (XW)^2
    let mut det_bd = det.clone();
    let mut xw_bd = xw.clone();
    for s in [B, BBar, D, DBar] {
        det_bd = det_bd.specialize_zero(s)?;
        xw_bd = xw_bd.specialize_zero(s)?;
    }
    cert.check("[b=d=0] det G + 1/4 (XW)^2", &det_bd - &minus_quarter_square(&xw_bd))?;

    let mut det_zero = det;
    for s in [A, B, C, D, ABar, BBar, CBar, DBar] {
        det_zero = det_zero.specialize_zero(s)?;
    }
    cert.check("[a=b=c=d=0] det G", det_zero)?;
    Ok(cert)
}

/// Fourier inspection of `XW − YZ` in the angle variable.
pub fn certify_volume_integrand(jet: &JetSymbols) -> Result<Certificate, SymbolicError> {
    let mut cert = Certificate::new(Identity::VolumeIntegrand);
    let integrand = (&(&jet.x * &jet.w) - &(&jet.y * &jet.z)).normal_form("XW - YZ")?;
    let mut average = LaurentPoly::zero();
    let mut stray = LaurentPoly::zero();
    for (mono, coef) in integrand.terms() {
        let mut term = LaurentPoly::zero();
        term.add_term(*mono, coef.clone());
        match mono.exp(E) {
            0 => average += &term,
            2 | -2 => {}
            _ => stray += &term,
        }
    }
    let expected = &(&(&m(&[(A, 1), (ABar, 1), (K, -2)]) - &m(&[(B, 1), (BBar, 1), (K, 2)]))
        + &m(&[(C, 1), (CBar, 1), (H, -2)]))
        - &m(&[(D, 1), (DBar, 1), (H, 2)]);
    cert.check("theta-average - volume densities / 4", &average - &expected)?;
    cert.check("terms of angular degree other than 0, +-2", stray)?;
    // reality: XW - YZ equals its own conjugate
    cert.check("XW - YZ - conj(XW - YZ)", &integrand - &integrand.conjugate().reduce_g())?;
    Ok(cert)
}

pub fn certify_fiber_geodesic(jet: &JetSymbols) -> Result<Certificate, SymbolicError> {
    let mut cert = Certificate::new(Identity::FiberGeodesic);
    let ds = d_theta_vec(&jet.s);
    cert.check_vector("d/dtheta s - s_theta", &sub_vec(&ds, &jet.s_theta));
    let dds = d_theta_vec(&jet.s_theta);
    let geodesic: Vec<LaurentPoly> = (0..4).map(|i| &dds[i] + &jet.s[i]).collect();
    cert.check_vector("d/dtheta s_theta + s", &geodesic);
    cert.check(
        "Q(s_theta,s_theta) - 1",
        &q_form_sym(&jet.s_theta, &jet.s_theta) - &LaurentPoly::one(),
    )?;
    Ok(cert)
}

/// The displayed closed form of `f_z`, in displayed slot order.
pub fn displayed_f_z() -> PolyPlucker {
    let two_i = gauss(0, 2);
    [
        m(&[(A, 1)]).scale(&two_i),
        m(&[(C, 1)]).scale(&-&two_i),
        LaurentPoly::zero(),
        LaurentPoly::zero(),
        m(&[(D, 1)]).scale(&-&two_i),
        m(&[(B, 1)]).scale(&two_i),
    ]
}

/// Reconstructed correspondence between our minor order and the displayed
/// tuple. It is the identity with sign `+1`; [`certify_gauss_map`] proves it.
pub fn ordering_dictionary() -> OrderingDictionary {
    OrderingDictionary {
        ours: ["p12", "p13", "p14", "p23", "p24", "p34"],
        displayed_slot: [0, 1, 2, 3, 4, 5],
        sign: 1,
        orientation: "wedge pairing read against e1^e2^e3^e4 in the frame (LN, LN^-1, L^-1 N, L^-1 N^-1)",
    }
}

/// `f_z = s_z ∧ s_θ + s ∧ s_{θ,z}` with `s_{θ,z} = ∂_θ s_z`.
pub fn f_z_symbolic(jet: &JetSymbols) -> PolyPlucker {
    let s_theta_z = d_theta_vec(&jet.s_z);
    let first = plucker_sym(&jet.s_z, &jet.s_theta);
    let second = plucker_sym(&jet.s, &s_theta_z);
    std::array::from_fn(|i| &first[i] + &second[i])
}

pub fn certify_gauss_map(jet: &JetSymbols) -> Result<Certificate, SymbolicError> {
    let mut cert = Certificate::new(Identity::GaussMap);
    let dict = ordering_dictionary();
    let fz = f_z_symbolic(jet);
    let displayed = displayed_f_z();
    let sign = GaussRat::int(dict.sign as i64);
    let residual: Vec<LaurentPoly> = (0..6)
        .map(|i| &fz[i].scale(&sign) - &displayed[dict.displayed_slot[i]])
        .collect();
    cert.check_vector("f_z - displayed tuple", &residual);

    // θ-independence and holomorphy: only a, b, c, d may appear
    let foreign: Vec<LaurentPoly> = fz
        .iter()
        .map(|p| {
            let mut out = LaurentPoly::zero();
            for (mono, coef) in p.reduce_g().terms() {
                if Symbol::ALL
                    .iter()
                    .any(|s| !matches!(s, A | B | C | D) && mono.exp(*s) != 0)
                {
                    out.add_term(*mono, coef.clone());
                }
            }
            out
        })
        .collect();
    cert.check_vector("f_z terms outside C[a,b,c,d]", &foreign);

    let pfaffian = &m(&[(A, 1), (B, 1)]) - &m(&[(C, 1), (D, 1)]);
    let square = wedge_form_sym(&fz, &fz);
    cert.check(
        "f_z ^ f_z + 8(ab - cd)",
        &square + &pfaffian.scale(&GaussRat::int(8)),
    )?;
    let conformal = square.substitute_monomial(A, &[(C, 1), (D, 1), (B, -1)]);
    cert.check("[ab = cd] f_z ^ f_z", conformal)?;

    let f = plucker_sym(&jet.s, &jet.s_theta);
    cert.check("f ^ f", wedge_form_sym(&f, &f))?;
    cert.ordering = Some(dict);
    Ok(cert)
}

/// Chain of the transversality lemma: if `uX + ūZ = 0` then the two
/// Higgs-field quadratic forms in the direction `u` agree.
pub fn certify_domination_lemma(sign_fault: bool) -> Result<Certificate, SymbolicError> {
    let mut cert = Certificate::new(Identity::DominationLemma);
    let u = m(&[(U, 1)]);
    let ub = m(&[(UBar, 1)]);
    let uu = &u * &ub;
    let abs2 = |p: &LaurentPoly| p * &p.conjugate();

    // |u h⁻¹c + ū h d̄|² − |u k⁻¹a + ū k b̄|²
    let gamma_side = &(&u * &m(&[(H, -1), (C, 1)])) + &(&ub * &m(&[(H, 1), (DBar, 1)]));
    let alpha_side = &(&u * &m(&[(K, -1), (A, 1)])) + &(&ub * &m(&[(K, 1), (BBar, 1)]));
    let lhs = &abs2(&gamma_side) - &abs2(&alpha_side);

    // p u² + p̄ ū² + |u|² diag
    let quad = |p: &LaurentPoly, diag: &LaurentPoly| {
        &(&(p * &(&u * &u)) + &(&p.conjugate() * &(&ub * &ub))) + &(&uu * diag)
    };
    let cd = m(&[(C, 1), (D, 1)]);
    let ab = m(&[(A, 1), (B, 1)]);
    let gamma_diag = &m(&[(H, -2), (C, 1), (CBar, 1)]) + &m(&[(H, 2), (D, 1), (DBar, 1)]);
    let alpha_diag = &m(&[(K, -2), (A, 1), (ABar, 1)]) + &m(&[(K, 2), (B, 1), (BBar, 1)]);
    let rhs_gamma = quad(&cd, &gamma_diag);
    let rhs_alpha = quad(&ab, &alpha_diag);
    let mut rhs = &rhs_gamma - &rhs_alpha;
    if sign_fault {
        rhs = &rhs_gamma + &rhs_alpha;
    }
    cert.check("expanded moduli difference", &lhs - &rhs)?;

    // the two halves of uX + ūZ, before dividing out g
    let jet = jet_symbols();
    let ge = m(&[(G, 1), (E, 1)]);
    let ge_inv = m(&[(G, -1), (E, -1)]);
    let upper = &u * &jet.x + &ub * &jet.z;
    let gamma_half = &ge * &(&(&u * &m(&[(C, 1)])) + &(&ub * &m(&[(H, 2), (DBar, 1)])));
    let alpha_half = &ge_inv * &(&(&u * &m(&[(A, 1)])) + &(&ub * &m(&[(K, 2), (BBar, 1)])));
    cert.check_vector("uX + ubar Z - split halves", &[&upper - &(&gamma_half + &alpha_half)]);
    let scaled = &(&abs2(&gamma_half) - &abs2(&alpha_half))
        - &(&m(&[(H, 1), (K, 1)]) * &lhs);
    cert.check("|gamma half|^2 - |alpha half|^2 - hk (moduli difference)", scaled)?;

    // link to the pull-back metrics: 4 · bracket = g_i(V, V)
    let four = GaussRat::int(4);
    let g1 = quad(&ab.scale(&four), &alpha_diag.scale(&four));
    let g2 = quad(&cd.scale(&four), &gamma_diag.scale(&four));
    cert.check(
        "4 (moduli difference) - (g_2(V,V) - g_1(V,V))",
        &lhs.scale(&four) - &(&g2 - &g1),
    )?;
    Ok(cert)
}

/// Runs every certification, optionally planting a fault in one identity.
pub fn certify_all(fault: Option<Identity>) -> Result<Vec<Certificate>, SymbolicError> {
    let jet_for = |id: Identity| {
        if fault == Some(id) {
            mutated_jet(id)
        } else {
            jet_symbols()
        }
    };
    Ok(vec![
        certify_unit_structure(&jet_for(Identity::UnitStructure))?,
        certify_metric_entries(&jet_for(Identity::MetricEntries))?,
        certify_det_g(&jet_for(Identity::DetG))?,
        certify_volume_integrand(&jet_for(Identity::VolumeIntegrand))?,
        certify_fiber_geodesic(&jet_for(Identity::FiberGeodesic))?,
        certify_gauss_map(&jet_for(Identity::GaussMap))?,
        certify_domination_lemma(fault == Some(Identity::DominationLemma))?,
    ])
}
