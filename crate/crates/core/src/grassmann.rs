//! Plücker coordinates of 2-planes in the rank-4 bundle and the Gauss map
//! `f = s ∧ s_θ` into the Klein quadric.
//!
//! Minors are ordered `(p12, p13, p14, p23, p24, p34)`.

use std::ops::{Add, Index, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::ads::{FrameJet, JetSampler};
use crate::algebra::{q_form, CVec4, I, ZERO};
use crate::domains::{ComplexField, Direction};
use crate::error::{AdsError, HiggsError};
use crate::higgs::{pfaffian_and_hopf, HarmonicMetric, HiggsData};
use crate::symbolic::ordering_dictionary;

pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plucker6(pub [Complex64; 6]);

impl Plucker6 {
    pub fn zero() -> Self {
        Plucker6([ZERO; 6])
    }

    /// `p12 p34 − p13 p24 + p14 p23`, zero exactly on decomposable vectors.
    pub fn quadric_residual(&self) -> Complex64 {
        let p = &self.0;
        p[0] * p[5] - p[1] * p[4] + p[2] * p[3]
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for Plucker6 {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl Add for Plucker6 {
    type Output = Plucker6;
    fn add(self, o: Plucker6) -> Plucker6 {
        Plucker6(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Plucker6 {
    type Output = Plucker6;
    fn sub(self, o: Plucker6) -> Plucker6 {
        Plucker6(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

pub fn plucker(u: &CVec4, v: &CVec4) -> Plucker6 {
    Plucker6(PAIRS.map(|(i, j)| u[i] * v[j] - u[j] * v[i]))
}

/// `p ∧ q` read against `e1 ∧ e2 ∧ e3 ∧ e4`.
pub fn wedge_form(p: &Plucker6, q: &Plucker6) -> Complex64 {
    let (p, q) = (&p.0, &q.0);
    p[0] * q[5] + p[5] * q[0] - p[1] * q[4] - p[4] * q[1] + p[2] * q[3] + p[3] * q[2]
}

#[derive(Debug, Clone, Copy)]
pub struct GaussPoint {
    pub f: Plucker6,
    /// `Q` restricted to `(s, s_θ)`.
    pub gram: [[Complex64; 2]; 2],
    pub gram_defect: f64,
}

pub fn gauss_map(jet: &FrameJet) -> GaussPoint {
    let f = plucker(&jet.s, &jet.s_theta);
    let b = [jet.s, jet.s_theta];
    let gram: [[Complex64; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| q_form(&b[i], &b[j])));
    let gram_defect = (gram[0][0] - 1.0)
        .norm()
        .max((gram[1][1] - 1.0).norm())
        .max(gram[0][1].norm())
        .max(gram[1][0].norm());
    GaussPoint { f, gram, gram_defect }
}

/// `f_z = s_z ∧ s_θ + s ∧ ∂_θ s_z` from the jet.
pub fn f_z_numeric(jet: &FrameJet) -> Plucker6 {
    plucker(&jet.s_z, &jet.s_theta) + plucker(&jet.s, &jet.s_theta_z())
}

/// `(2iα, −2iγ, 0, 0, −2iδ, 2iβ)` placed in our ordering through the
/// certified dictionary.
pub fn f_z_closed_form(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Plucker6 {
    let displayed = [2.0 * I * alpha, -2.0 * I * gamma, ZERO, ZERO, -2.0 * I * delta, 2.0 * I * beta];
    let dict = ordering_dictionary();
    Plucker6(std::array::from_fn(|i| displayed[dict.displayed_slot[i]] * dict.sign as f64))
}

/// Six component fields of a Plücker-valued map.
#[derive(Debug, Clone)]
pub struct PluckerField(pub [ComplexField; 6]);

impl PluckerField {
    pub fn value(&self, idx: usize) -> Plucker6 {
        Plucker6(std::array::from_fn(|i| self.0[i].value(idx)))
    }

    pub fn is_valid(&self, idx: usize) -> bool {
        self.0.iter().all(|f| f.is_valid(idx))
    }
}

#[derive(Debug, Clone)]
pub struct GaussDerivative {
    pub theta: f64,
    pub numeric: PluckerField,
    pub closed: PluckerField,
    pub mismatch: f64,
    pub flagged: bool,
    /// `sup |∂_z̄|` over the closed-form components.
    pub holomorphy_residual: f64,
}

pub const GAUSS_DERIVATIVE_TOL: f64 = 1e-10;

pub fn gauss_derivative(data: &HiggsData, metric: &HarmonicMetric, theta: f64) -> Result<GaussDerivative, AdsError> {
    let sampler = JetSampler::new(data, metric)?;
    let grid = data.grid().clone();
    let mut num: [Vec<Complex64>; 6] = std::array::from_fn(|_| vec![ZERO; grid.len()]);
    let mut valid = vec![false; grid.len()];
    let mut mismatch: f64 = 0.0;
    for idx in 0..grid.len() {
        if !sampler.has_jet(idx) {
            continue;
        }
        valid[idx] = true;
        let jet = sampler.jet(idx, theta)?;
        let fz = f_z_numeric(&jet);
        let inp = jet.input;
        let closed = f_z_closed_form(inp.alpha, inp.beta, inp.gamma, inp.delta);
        let scale = 1.0 + closed.norm_inf();
        mismatch = mismatch.max((fz - closed).norm_inf() / scale);
        for (c, v) in num.iter_mut().zip(fz.0) {
            c[idx] = v;
        }
    }
    let numeric = PluckerField(
        num.map(|v| ComplexField::new(grid.clone(), v, valid.clone()).expect("shape")),
    );
    let closed_fields: [ComplexField; 6] = {
        let four = data
            .alpha
            .zip_with(&data.beta, |a, b| (a, b))
            .and_then(|ab| data.gamma.zip_with(&data.delta, |c, d| (c, d)).map(|cd| (ab, cd)))
            .map_err(HiggsError::from)?;
        let (ab, cd) = four;
        let both = ab.zip_with(&cd, |p, q| (p, q)).map_err(HiggsError::from)?;
        std::array::from_fn(|i| both.map(move |((a, b), (c, d))| f_z_closed_form(a, b, c, d).0[i]))
    };
    let holomorphy_residual = closed_fields
        .iter()
        .map(|f| f.derivative(Direction::Dzbar).sup_norm())
        .fold(0.0, f64::max);
    Ok(GaussDerivative {
        theta,
        numeric,
        closed: PluckerField(closed_fields),
        mismatch,
        flagged: mismatch > GAUSS_DERIVATIVE_TOL,
        holomorphy_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformalityReport {
    pub pfaffian_sup: f64,
    /// `sup |⟨f_z, f_z⟩ + 8(αβ − γδ)|`.
    pub wedge_defect: f64,
    pub minimal: bool,
    pub immersion_nodes: usize,
    pub checked_nodes: usize,
}

/// `⟨f_z, f_z⟩` at every node with a jet, plus the comparison with the
/// Pfaffian.
pub fn conformality_report(
    data: &HiggsData,
    metric: &HarmonicMetric,
    tol: f64,
) -> Result<(ConformalityReport, ComplexField), AdsError> {
    let d = gauss_derivative(data, metric, 0.0)?;
    let ph = pfaffian_and_hopf(data, tol)?;
    let grid = data.grid().clone();
    let mut values = vec![ZERO; grid.len()];
    let mut valid = vec![false; grid.len()];
    let (mut defect, mut immersion, mut checked): (f64, usize, usize) = (0.0, 0, 0);
    for idx in 0..grid.len() {
        if !d.numeric.is_valid(idx) {
            continue;
        }
        let fz = d.numeric.value(idx);
        let w = wedge_form(&fz, &fz);
        values[idx] = w;
        valid[idx] = true;
        checked += 1;
        let pf = ph.pfaffian.value(idx);
        defect = defect.max((w + 8.0 * pf).norm());
        if fz.norm_inf() > tol {
            immersion += 1;
        }
    }
    let field = ComplexField::new(grid, values, valid).map_err(HiggsError::from)?;
    Ok((
        ConformalityReport {
            pfaffian_sup: ph.pfaffian.sup_norm(),
            wedge_defect: defect,
            minimal: ph.pfaffian_vanishes,
            immersion_nodes: immersion,
            checked_nodes: checked,
        },
        field,
    ))
}
