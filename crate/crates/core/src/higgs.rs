//! Higgs-bundle data for a pair of `SL(2,R)` representations, the flat
//! connection on the tensor product, pull-back metrics, Euler numbers,
//! domination, and the torus solver for the self-duality equations.
//!
//! Factor conventions: `φ₁ = [[0, α], [β, 0]]`, `H₁ = diag(k⁻¹, k)`, and the
//! same for the second factor with `(γ, δ, h)`. The connection is
//! `A_z = H⁻¹∂H + Φ`, `A_z̄ = Φ^{*H}`; its curvature is
//! `F = ∂_z A_z̄ − ∂_z̄ A_z + [A_z, A_z̄]`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{tensor_sum, CMat, CMat2, CMat4, ONE, ZERO};
use crate::domains::{integrate, ChartGrid, ChartKind, ComplexField, Direction, RealField};
use crate::error::{DomainError, HiggsError};

/// Calibrated constant `s` in the explicit Fuchsian solution `k = s(1 − |z|²)`.
pub const FUCHSIAN_SCALE: f64 = 1.0;

pub const MAX_NEWTON_STEPS: usize = 25;
const CG_TOL: f64 = 1e-12;
const TORUS_CONSTANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factor {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    First,
    Second,
    Full,
}

/// Relative holomorphy tolerance for a chart with the given spacing:
/// `sup|∂_z̄ f| ≤ tol · (1 + sup|f|)`.
pub fn holomorphy_tolerance(spacing: f64) -> f64 {
    (20.0 * spacing * spacing).min(1e-2)
}

#[derive(Debug, Clone)]
pub struct HiggsData {
    pub alpha: ComplexField,
    pub beta: ComplexField,
    pub gamma: ComplexField,
    pub delta: ComplexField,
    pub e1: i64,
    pub e2: i64,
}

impl HiggsData {
    pub fn new(
        alpha: ComplexField,
        beta: ComplexField,
        gamma: ComplexField,
        delta: ComplexField,
        e1: i64,
        e2: i64,
    ) -> Result<Self, HiggsError> {
        let data = HiggsData {
            alpha,
            beta,
            gamma,
            delta,
            e1,
            e2,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn grid(&self) -> &Arc<ChartGrid> {
        self.alpha.grid()
    }

    fn fields(&self) -> [(&'static str, &ComplexField); 4] {
        [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("delta", &self.delta),
        ]
    }

    fn validate(&self) -> Result<(), HiggsError> {
        for (_, f) in self.fields() {
            if !f.same_grid(&self.alpha) {
                return Err(DomainError::GridMismatch.into());
            }
        }
        let grid = self.grid().clone();
        for e in [self.e1, self.e2] {
            if e % 2 != 0 {
                return Err(HiggsError::OddEuler(e));
            }
            if let Some(g) = grid.genus() {
                let bound = 2 * g as i64 - 2;
                if e.abs() > bound {
                    return Err(HiggsError::EulerOutOfRange { value: e, bound });
                }
            }
        }
        if grid.is_periodic() {
            for (name, f) in self.fields() {
                let spread = spread(f);
                if spread > TORUS_CONSTANT_TOL * (1.0 + f.sup_norm()) {
                    return Err(HiggsError::NotConstantOnTorus { field: name, spread });
                }
            }
        } else {
            let tol = holomorphy_tolerance(grid.spacing());
            for (name, f) in self.fields() {
                let residual = f.derivative(Direction::Dzbar).sup_norm() / (1.0 + f.sup_norm());
                if residual > tol {
                    return Err(HiggsError::NotHolomorphic {
                        field: name,
                        residual,
                        tol,
                    });
                }
            }
        }
        Ok(())
    }

    fn pair(&self, which: Factor) -> (&ComplexField, &ComplexField) {
        match which {
            Factor::First => (&self.alpha, &self.beta),
            Factor::Second => (&self.gamma, &self.delta),
        }
    }

    /// The Higgs field `Φ = φ₁ ⊗ Id + Id ⊗ φ₂` at a node.
    pub fn phi(&self, idx: usize) -> CMat4 {
        let (a, b, c, d) = (
            self.alpha.value(idx),
            self.beta.value(idx),
            self.gamma.value(idx),
            self.delta.value(idx),
        );
        tensor_sum(&CMat([[ZERO, a], [b, ZERO]]), &CMat([[ZERO, c], [d, ZERO]]))
    }
}

fn spread(f: &ComplexField) -> f64 {
    let first = (0..f.values().len()).find(|&i| f.is_valid(i));
    let Some(i0) = first else { return 0.0 };
    let v0 = f.value(i0);
    (0..f.values().len())
        .filter(|&i| f.is_valid(i))
        .map(|i| (f.value(i) - v0).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct HarmonicMetric {
    pub h: RealField,
    pub k: RealField,
}

impl HarmonicMetric {
    pub fn new(h: RealField, k: RealField) -> Result<Self, HiggsError> {
        if !h.same_grid(&k) {
            return Err(DomainError::GridMismatch.into());
        }
        for (which, f) in [("h", &h), ("k", &k)] {
            for i in 0..f.values().len() {
                let v = f.value(i);
                if f.is_valid(i) && !(v > 0.0 && v.is_finite()) {
                    return Err(HiggsError::NonPositiveMetric { which, node: i, value: v });
                }
            }
        }
        Ok(HarmonicMetric { h, k })
    }

    /// Accepts complex samples whose imaginary parts vanish.
    pub fn from_complex(h: &ComplexField, k: &ComplexField) -> Result<Self, HiggsError> {
        Self::new(h.to_real(1e-12)?, k.to_real(1e-12)?)
    }

    pub fn constant(grid: &Arc<ChartGrid>, h: f64, k: f64) -> Result<Self, HiggsError> {
        Self::new(RealField::constant(grid, h), RealField::constant(grid, k))
    }

    fn factor(&self, which: Factor) -> &RealField {
        match which {
            Factor::First => &self.k,
            Factor::Second => &self.h,
        }
    }
}

/// The explicit Fuchsian solution: `α = 1`, `β = γ = δ = 0`,
/// `k = s(1 − |z|²)`, `h = 1`. The declared first Euler number is `2g − 2`
/// on closed charts and `2` on a disk patch.
pub fn fuchsian(grid: &Arc<ChartGrid>, scale: f64) -> Result<(HiggsData, HarmonicMetric), HiggsError> {
    let one = ComplexField::constant(grid, ONE);
    let zero = ComplexField::constant(grid, ZERO);
    let e1 = grid.genus().map_or(2, |g| 2 * g as i64 - 2);
    let data = HiggsData::new(one, zero.clone(), zero.clone(), zero, e1, 0)?;
    let k = RealField::from_fn(grid, |z| scale * (1.0 - z.norm_sqr()));
    let metric = HarmonicMetric::new(RealField::constant(grid, 1.0), k)?;
    Ok((data, metric))
}

/// Connection matrices per node; invalid nodes hold zeros.
#[derive(Debug, Clone)]
pub struct Connection<const N: usize> {
    grid: Arc<ChartGrid>,
    pub a_z: Vec<CMat<N>>,
    pub a_zbar: Vec<CMat<N>>,
    pub valid: Vec<bool>,
}

#[derive(Debug, Clone)]
pub enum AssembledConnection {
    Factor(Connection<2>),
    Full(Connection<4>),
}

impl<const N: usize> Connection<N> {
    pub fn grid(&self) -> &Arc<ChartGrid> {
        &self.grid
    }

    /// `sup |tr A_z|` over valid nodes; `det H = 1` makes this vanish.
    pub fn trace_defect(&self) -> f64 {
        self.a_z
            .iter()
            .zip(&self.valid)
            .filter(|(_, ok)| **ok)
            .map(|(a, _)| a.trace().norm())
            .fold(0.0, f64::max)
    }

    fn entry_field(&self, mats: &[CMat<N>], r: usize, c: usize) -> ComplexField {
        let values = mats.iter().map(|m| m.0[r][c]).collect();
        ComplexField::new(self.grid.clone(), values, self.valid.clone()).expect("shape")
    }
}

fn assemble_factor(data: &HiggsData, metric: &HarmonicMetric, which: Factor) -> Result<Connection<2>, HiggsError> {
    let (a, b) = data.pair(which);
    let m = metric.factor(which);
    if !a.same_grid(m) {
        return Err(DomainError::GridMismatch.into());
    }
    let dlog = m.map(f64::ln).to_complex().derivative(Direction::Dz);
    let n = a.values().len();
    let mut valid = vec![false; n];
    let mut a_z = vec![CMat2::zero(); n];
    let mut a_zbar = vec![CMat2::zero(); n];
    for i in 0..n {
        if !(dlog.is_valid(i) && a.is_valid(i) && b.is_valid(i)) {
            continue;
        }
        valid[i] = true;
        let (al, be, k, dl) = (a.value(i), b.value(i), m.value(i), dlog.value(i));
        a_z[i] = CMat([[-dl, al], [be, dl]]);
        a_zbar[i] = CMat([[ZERO, be.conj() * (k * k)], [al.conj() / (k * k), ZERO]]);
    }
    Ok(Connection {
        grid: a.grid().clone(),
        a_z,
        a_zbar,
        valid,
    })
}

pub fn assemble_connection(
    data: &HiggsData,
    metric: &HarmonicMetric,
    rank: Rank,
) -> Result<AssembledConnection, HiggsError> {
    Ok(match rank {
        Rank::First => AssembledConnection::Factor(assemble_factor(data, metric, Factor::First)?),
        Rank::Second => AssembledConnection::Factor(assemble_factor(data, metric, Factor::Second)?),
        Rank::Full => {
            let c1 = assemble_factor(data, metric, Factor::First)?;
            let c2 = assemble_factor(data, metric, Factor::Second)?;
            let n = c1.valid.len();
            let valid: Vec<bool> = (0..n).map(|i| c1.valid[i] && c2.valid[i]).collect();
            let sum = |m1: &[CMat2], m2: &[CMat2]| -> Vec<CMat4> {
                (0..n)
                    .map(|i| if valid[i] { tensor_sum(&m1[i], &m2[i]) } else { CMat4::zero() })
                    .collect()
            };
            AssembledConnection::Full(Connection {
                grid: c1.grid.clone(),
                a_z: sum(&c1.a_z, &c2.a_z),
                a_zbar: sum(&c1.a_zbar, &c2.a_zbar),
                valid,
            })
        }
    })
}

#[derive(Debug, Clone)]
pub struct FlatnessResidual {
    pub field: RealField,
    pub sup: f64,
}

pub fn flatness_residual<const N: usize>(conn: &Connection<N>) -> Result<FlatnessResidual, HiggsError> {
    let mut dz_bar_az = vec![vec![ZERO; N * N]; conn.valid.len()];
    let mut dz_azbar = vec![vec![ZERO; N * N]; conn.valid.len()];
    let mut valid = conn.valid.clone();
    for r in 0..N {
        for c in 0..N {
            let d1 = conn.entry_field(&conn.a_z, r, c).derivative(Direction::Dzbar);
            let d2 = conn.entry_field(&conn.a_zbar, r, c).derivative(Direction::Dz);
            for i in 0..valid.len() {
                valid[i] &= d1.is_valid(i) && d2.is_valid(i);
                dz_bar_az[i][r * N + c] = d1.value(i);
                dz_azbar[i][r * N + c] = d2.value(i);
            }
        }
    }
    if !valid.iter().any(|v| *v) {
        return Err(HiggsError::StencilTooSmall);
    }
    let values: Vec<f64> = (0..valid.len())
        .into_par_iter()
        .map(|i| {
            if !valid[i] {
                return 0.0;
            }
            let mut f = conn.a_z[i].commutator(&conn.a_zbar[i]);
            for r in 0..N {
                for c in 0..N {
                    f.0[r][c] += dz_azbar[i][r * N + c] - dz_bar_az[i][r * N + c];
                }
            }
            f.frobenius()
        })
        .collect();
    let field = RealField::new(conn.grid.clone(), values, valid)?;
    let sup = field.sup_norm();
    Ok(FlatnessResidual { field, sup })
}

impl AssembledConnection {
    pub fn flatness_residual(&self) -> Result<FlatnessResidual, HiggsError> {
        match self {
            AssembledConnection::Factor(c) => flatness_residual(c),
            AssembledConnection::Full(c) => flatness_residual(c),
        }
    }
}

/// Golden-section search for `s` minimizing the flatness residual of the
/// first factor of the Fuchsian family `k = s(1 − |z|²)` on `grid`.
pub fn calibrate_fuchsian_scale(grid: &Arc<ChartGrid>, lo: f64, hi: f64, tol: f64) -> Result<f64, HiggsError> {
    let cost = |s: f64| -> Result<f64, HiggsError> {
        let (data, metric) = fuchsian(grid, s)?;
        assemble_connection(&data, &metric, Rank::First)?.flatness_residual().map(|r| r.sup)
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (cost(x1)?, cost(x2)?);
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = cost(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = cost(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

// ---------------------------------------------------------------------------
// Torus solver

struct TorusOps {
    n: usize,
    tau: Complex64,
}

impl TorusOps {
    fn central(&self, u: &[f64], axis: usize) -> Vec<f64> {
        let n = self.n;
        let scale = n as f64 / 2.0;
        (0..n * n)
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                let (p, m) = if axis == 0 {
                    (j * n + (i + 1) % n, j * n + (i + n - 1) % n)
                } else {
                    (((j + 1) % n) * n + i, ((j + n - 1) % n) * n + i)
                };
                (u[p] - u[m]) * scale
            })
            .collect()
    }

    fn dx(&self, u: &[f64]) -> Vec<f64> {
        self.central(u, 0)
    }

    fn dy(&self, u: &[f64]) -> Vec<f64> {
        let da = self.central(u, 0);
        let db = self.central(u, 1);
        da.iter().zip(&db).map(|(a, b)| (b - a * self.tau.re) / self.tau.im).collect()
    }

    /// `¼(D_x² + D_y²)`, the discrete `∂_z̄ ∂_z` of the curvature stencil.
    fn quarter_laplacian(&self, u: &[f64]) -> Vec<f64> {
        let xx = self.dx(&self.dx(u));
        let yy = self.dy(&self.dy(u));
        xx.iter().zip(&yy).map(|(a, b)| 0.25 * (a + b)).collect()
    }
}

/// Scalar equation `∂_z̄∂_z u + |a|² e^{−2u} − |b|² e^{2u} = 0` for `u = log k`.
fn scalar_residual(ops: &TorusOps, u: &[f64], a2: &[f64], b2: &[f64]) -> Vec<f64> {
    let lap = ops.quarter_laplacian(u);
    (0..u.len())
        .map(|i| lap[i] + a2[i] * (-2.0 * u[i]).exp() - b2[i] * (2.0 * u[i]).exp())
        .collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for `(−¼L + diag(d)) x = rhs` with `d > 0`.
fn cg_solve(ops: &TorusOps, diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let apply = |x: &[f64]| -> Vec<f64> {
        let lap = ops.quarter_laplacian(x);
        (0..x.len()).map(|i| -lap[i] + diag[i] * x[i]).collect()
    };
    let mut x = vec![0.0; rhs.len()];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = CG_TOL * CG_TOL * rr.max(f64::MIN_POSITIVE);
    for _ in 0..10 * rhs.len() {
        if rr <= target {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    x
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub scalar_residual: f64,
    pub flatness_residual: f64,
}

fn newton(
    ops: &TorusOps,
    unknown: &'static str,
    a2: &[f64],
    b2: &[f64],
    mut u: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64), HiggsError> {
    let a_zero = a2.iter().all(|v| *v == 0.0);
    let b_zero = b2.iter().all(|v| *v == 0.0);
    if a_zero && b_zero {
        // harmonic functions on a closed torus are constant
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        return Ok((vec![mean; u.len()], 0, 0.0));
    }
    if a_zero != b_zero {
        let (present, absent) = if a_zero { ("second", "first") } else { ("first", "second") };
        return Err(HiggsError::Obstruction {
            unknown,
            reason: format!(
                "the {absent} Higgs component vanishes identically, so the integral of the \
                 {present} component's forcing term cannot vanish on a closed torus"
            ),
        });
    }
    let mut f = scalar_residual(ops, &u, a2, b2);
    let mut res = sup(&f);
    let mut it = 0;
    while res > tol {
        if it >= max_iter {
            return Err(HiggsError::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        it += 1;
        let diag: Vec<f64> = (0..u.len())
            .map(|i| 2.0 * a2[i] * (-2.0 * u[i]).exp() + 2.0 * b2[i] * (2.0 * u[i]).exp())
            .collect();
        let step = cg_solve(ops, &diag, &f);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(x, d)| x + t * d).collect();
            let ft = scalar_residual(ops, &trial, a2, b2);
            let rt = sup(&ft);
            if rt < res || t < 1e-6 {
                u = trial;
                f = ft;
                res = rt;
                break;
            }
            t *= 0.5;
        }
    }
    Ok((u, it, res))
}

/// Damped Newton iteration for `(log k, log h)` on a torus chart.
///
/// Converges when the flatness residual of the full connection has sup-norm
/// at most `tol`.
pub fn solve_hitchin_torus(
    data: &HiggsData,
    initial: &HarmonicMetric,
    tol: f64,
    max_iter: usize,
) -> Result<(HarmonicMetric, SolveReport), HiggsError> {
    let grid = data.grid().clone();
    let ChartKind::Torus { modulus_re, modulus_im } = grid.kind() else {
        return Err(HiggsError::NotTorus);
    };
    if !initial.k.same_grid(&data.alpha) {
        return Err(DomainError::GridMismatch.into());
    }
    let ops = TorusOps {
        n: grid.n(),
        tau: Complex64::new(modulus_re, modulus_im),
    };
    let sq = |f: &ComplexField| -> Vec<f64> { f.values().iter().map(|v| v.norm_sqr()).collect() };
    let logs = |f: &RealField| -> Vec<f64> { f.values().iter().map(|v| v.ln()).collect() };
    // F_F = 2 sqrt(F₁² + F₂²) for the full connection when off-diagonals vanish
    let scalar_tol = tol / 4.0;
    let (uk, it_k, rk) = newton(
        &ops,
        "log k",
        &sq(&data.alpha),
        &sq(&data.beta),
        logs(&initial.k),
        scalar_tol,
        max_iter,
    )?;
    let (uh, it_h, rh) = newton(
        &ops,
        "log h",
        &sq(&data.gamma),
        &sq(&data.delta),
        logs(&initial.h),
        scalar_tol,
        max_iter,
    )?;
    let exp_field = |u: Vec<f64>| -> Result<RealField, DomainError> {
        RealField::new(grid.clone(), u.into_iter().map(f64::exp).collect(), vec![true; grid.len()])
    };
    let metric = HarmonicMetric::new(exp_field(uh)?, exp_field(uk)?)?;
    let flat = assemble_connection(data, &metric, Rank::Full)?.flatness_residual()?.sup;
    let iterations = it_k.max(it_h);
    if flat > tol {
        return Err(HiggsError::NoConvergence {
            iterations,
            residual: flat,
        });
    }
    Ok((
        metric,
        SolveReport {
            iterations,
            scalar_residual: rk.max(rh),
            flatness_residual: flat,
        },
    ))
}

// ---------------------------------------------------------------------------
// Pull-back metrics

/// `g = P dz² + P̄ dz̄² + M dz dz̄` with `dz dz̄ ≡ dx² + dy²`.
#[derive(Debug, Clone)]
pub struct PullbackMetric {
    pub p: ComplexField,
    pub m: RealField,
}

impl PullbackMetric {
    /// Real symmetric matrix in `(dx, dy)`.
    pub fn real_matrix(&self, idx: usize) -> [[f64; 2]; 2] {
        let (p, m) = (self.p.value(idx), self.m.value(idx));
        [[m + 2.0 * p.re, -2.0 * p.im], [-2.0 * p.im, m - 2.0 * p.re]]
    }

    /// `g(V, V)` for `V = v_x ∂x + v_y ∂y`.
    pub fn eval(&self, idx: usize, v: [f64; 2]) -> f64 {
        let g = self.real_matrix(idx);
        g[0][0] * v[0] * v[0] + 2.0 * g[0][1] * v[0] * v[1] + g[1][1] * v[1] * v[1]
    }

    pub fn is_valid(&self, idx: usize) -> bool {
        self.p.is_valid(idx) && self.m.is_valid(idx)
    }
}

pub fn pullback_metric(data: &HiggsData, metric: &HarmonicMetric, which: Factor) -> Result<PullbackMetric, HiggsError> {
    let (a, b) = data.pair(which);
    let w = metric.factor(which);
    let p = a.zip_with(b, |x, y| 4.0 * x * y)?;
    let ab = a.zip_with(b, |x, y| (x.norm_sqr(), y.norm_sqr()))?;
    let m = ab.zip_with(w, |(a2, b2), k| 4.0 * (k * k * b2 + a2 / (k * k)))?;
    Ok(PullbackMetric { p, m })
}

/// `4(w⁻²|a|² − w²|b|²)` for the factor's pair `(a, b)` and metric `w`.
pub fn pullback_volume_form(data: &HiggsData, metric: &HarmonicMetric, which: Factor) -> Result<RealField, HiggsError> {
    let (a, b) = data.pair(which);
    let w = metric.factor(which);
    let ab = a.zip_with(b, |x, y| (x.norm_sqr(), y.norm_sqr()))?;
    Ok(ab.zip_with(w, |(a2, b2), k| 4.0 * (a2 / (k * k) - k * k * b2))?)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EulerNumber {
    pub value: f64,
    pub nearest_even: i64,
    pub distance: f64,
}

pub fn euler_number(data: &HiggsData, metric: &HarmonicMetric, which: Factor) -> Result<EulerNumber, HiggsError> {
    if !data.grid().is_closed() {
        return Err(HiggsError::NotClosed);
    }
    let vol = pullback_volume_form(data, metric, which)?;
    let value = integrate(&vol)? / (2.0 * std::f64::consts::PI);
    let nearest_even = 2 * (value / 2.0).round() as i64;
    Ok(EulerNumber {
        value,
        nearest_even,
        distance: (value - nearest_even as f64).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub dominated: bool,
    pub margin: f64,
    pub checked_nodes: usize,
    pub failing_nodes: usize,
}

fn symmetric_eigenvalues(m: [[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let r = half.hypot(m[0][1]);
    (mean - r, mean + r)
}

/// Pointwise positive-definiteness of `g₁ − g₂`.
pub fn domination_report(g1: &PullbackMetric, g2: &PullbackMetric) -> Result<DominationReport, HiggsError> {
    if !g1.p.same_grid(&g2.p) {
        return Err(DomainError::GridMismatch.into());
    }
    let (mut checked, mut failing, mut margin) = (0, 0, f64::INFINITY);
    for i in 0..g1.p.values().len() {
        if !(g1.is_valid(i) && g2.is_valid(i)) {
            continue;
        }
        let (a, b) = (g1.real_matrix(i), g2.real_matrix(i));
        let d = [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]];
        let (lo, _) = symmetric_eigenvalues(d);
        checked += 1;
        if lo <= 0.0 {
            failing += 1;
        }
        margin = margin.min(lo);
    }
    Ok(DominationReport {
        dominated: checked > 0 && failing == 0,
        margin: if checked == 0 { 0.0 } else { margin },
        checked_nodes: checked,
        failing_nodes: failing,
    })
}

#[derive(Debug, Clone)]
pub struct PfaffianHopf {
    pub pfaffian: ComplexField,
    pub hopf: ComplexField,
    pub pfaffian_vanishes: bool,
}

/// Pfaffian `αβ − γδ` and Hopf differential `−2(αβ + γδ)`.
pub fn pfaffian_and_hopf(data: &HiggsData, tol: f64) -> Result<PfaffianHopf, HiggsError> {
    let ab = data.alpha.zip_with(&data.beta, |a, b| a * b)?;
    let cd = data.gamma.zip_with(&data.delta, |c, d| c * d)?;
    let pfaffian = ab.zip_with(&cd, |x, y| x - y)?;
    let hopf = ab.zip_with(&cd, |x, y| -2.0 * (x + y))?;
    let pfaffian_vanishes = pfaffian.sup_norm() <= tol;
    Ok(PfaffianHopf {
        pfaffian,
        hopf,
        pfaffian_vanishes,
    })
}

/// Coefficients `c₁..c₄` of `det(x − M) = x⁴ + c₁x³ + c₂x² + c₃x + c₄`
/// by the Faddeev–LeVerrier recursion.
pub fn char_poly(m: &CMat4) -> [Complex64; 4] {
    let mut coeffs = [ZERO; 4];
    let mut mk = CMat4::zero();
    let mut c_prev = ONE;
    for k in 1..=4 {
        mk = *m * (mk + CMat4::identity().scale(c_prev));
        let c = -mk.trace() / k as f64;
        coeffs[k - 1] = c;
        c_prev = c;
    }
    coeffs
}

pub fn splitting_euler_classes(e1: i64, e2: i64) -> Result<(i64, i64), HiggsError> {
    for e in [e1, e2] {
        if e % 2 != 0 {
            return Err(HiggsError::OddEuler(e));
        }
    }
    Ok(((e1 - e2).abs(), (e1 + e2).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::ChartGrid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn torus(n: usize) -> Arc<ChartGrid> {
        Arc::new(ChartGrid::torus(n, c(0.2, 1.1)).unwrap())
    }

    fn constants(grid: &Arc<ChartGrid>, v: [Complex64; 4], e: (i64, i64)) -> Result<HiggsData, HiggsError> {
        let f = |x| ComplexField::constant(grid, x);
        HiggsData::new(f(v[0]), f(v[1]), f(v[2]), f(v[3]), e.0, e.1)
    }

    #[test]
    fn trivial_connection_is_flat() {
        let g = torus(8);
        let data = constants(&g, [ZERO; 4], (0, 0)).unwrap();
        let metric = HarmonicMetric::constant(&g, 1.0, 1.0).unwrap();
        let conn = assemble_connection(&data, &metric, Rank::Full).unwrap();
        assert_eq!(conn.flatness_residual().unwrap().sup, 0.0);
    }

    #[test]
    fn connection_slots_for_alpha_only() {
        let g = torus(8);
        let data = constants(&g, [ONE, ZERO, ZERO, ZERO], (0, 0));
        // α alone is rejected by nothing at construction time
        let data = data.unwrap();
        let metric = HarmonicMetric::constant(&g, 1.0, 1.0).unwrap();
        let AssembledConnection::Full(conn) = assemble_connection(&data, &metric, Rank::Full).unwrap() else {
            unreachable!()
        };
        let az = conn.a_z[5];
        let azb = conn.a_zbar[5];
        for r in 0..4 {
            for col in 0..4 {
                // α occupies (0,2) and (1,3); ᾱk⁻² occupies (2,0) and (3,1)
                let ea = if (r, col) == (0, 2) || (r, col) == (1, 3) { ONE } else { ZERO };
                let eb = if (r, col) == (2, 0) || (r, col) == (3, 1) { ONE } else { ZERO };
                assert_eq!(az.0[r][col], ea);
                assert_eq!(azb.0[r][col], eb);
            }
        }
        assert_eq!(conn.trace_defect(), 0.0);
    }

    #[test]
    fn constant_balance_is_flat() {
        let g = torus(8);
        let (a, b) = (c(0.6, -0.8), c(0.3, 0.4));
        let k = (a.norm() / b.norm()).sqrt();
        let data = constants(&g, [a, b, ZERO, ZERO], (0, 0)).unwrap();
        let metric = HarmonicMetric::constant(&g, 1.7, k).unwrap();
        let res = assemble_connection(&data, &metric, Rank::First).unwrap().flatness_residual().unwrap();
        assert!(res.sup < 1e-14, "{}", res.sup);
    }

    #[test]
    fn solver_finds_constant_balance() {
        let g = torus(16);
        let data = constants(&g, [c(2.0, 0.0), c(0.5, 0.0), ZERO, ZERO], (0, 0)).unwrap();
        let init = HarmonicMetric::constant(&g, 1.0, 1.0).unwrap();
        let (m, rep) = solve_hitchin_torus(&data, &init, 1e-10, MAX_NEWTON_STEPS).unwrap();
        for i in 0..g.len() {
            assert!((m.k.value(i) - 2.0).abs() < 1e-10);
            assert_eq!(m.h.value(i), 1.0);
        }
        assert!(rep.flatness_residual < 1e-10);
    }

    #[test]
    fn solver_from_nonconstant_start() {
        let g = torus(16);
        let data = constants(&g, [c(1.0, 1.0), c(0.0, 2.0), c(3.0, 0.0), c(1.0, 0.0)], (0, 0)).unwrap();
        let h0 = RealField::from_fn(&g, |z| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * z.re).sin());
        let k0 = RealField::from_fn(&g, |z| 2.0 + 0.5 * (2.0 * std::f64::consts::PI * z.re).cos());
        let init = HarmonicMetric::new(h0, k0).unwrap();
        let (m, _) = solve_hitchin_torus(&data, &init, 1e-10, MAX_NEWTON_STEPS).unwrap();
        let kk = (2f64.sqrt() / 2.0).sqrt();
        let hh = 3f64.sqrt();
        for i in 0..g.len() {
            assert!((m.k.value(i) - kk).abs() < 1e-9);
            assert!((m.h.value(i) - hh).abs() < 1e-9);
        }
    }

    #[test]
    fn solver_obstruction_and_abelian_case() {
        let g = torus(8);
        let data = constants(&g, [ONE, ZERO, ZERO, ZERO], (0, 0)).unwrap();
        let init = HarmonicMetric::constant(&g, 1.0, 1.0).unwrap();
        assert!(matches!(
            solve_hitchin_torus(&data, &init, 1e-10, MAX_NEWTON_STEPS),
            Err(HiggsError::Obstruction { .. })
        ));
        let data = constants(&g, [ZERO; 4], (0, 0)).unwrap();
        let init = HarmonicMetric::constant(&g, 2.5, 0.7).unwrap();
        let (m, rep) = solve_hitchin_torus(&data, &init, 1e-10, MAX_NEWTON_STEPS).unwrap();
        assert!((m.k.value(3) - 0.7).abs() < 1e-14 && (m.h.value(3) - 2.5).abs() < 1e-14);
        assert_eq!(rep.flatness_residual, 0.0);
    }

    #[test]
    fn solver_requires_torus() {
        let g = Arc::new(ChartGrid::disk_patch(0.5, 16).unwrap());
        let (data, metric) = fuchsian(&g, 1.0).unwrap();
        assert!(matches!(
            solve_hitchin_torus(&data, &metric, 1e-10, 5),
            Err(HiggsError::NotTorus)
        ));
    }

    #[test]
    fn data_validation() {
        let g = torus(8);
        assert!(matches!(constants(&g, [ZERO; 4], (1, 0)), Err(HiggsError::OddEuler(1))));
        assert!(matches!(constants(&g, [ZERO; 4], (2, 0)), Err(HiggsError::EulerOutOfRange { .. })));
        let varying = ComplexField::from_fn(&g, |z| z);
        let zero = ComplexField::constant(&g, ZERO);
        assert!(matches!(
            HiggsData::new(varying, zero.clone(), zero.clone(), zero, 0, 0),
            Err(HiggsError::NotConstantOnTorus { field: "alpha", .. })
        ));
        let d = Arc::new(ChartGrid::disk_patch(0.8, 64).unwrap());
        let anti = ComplexField::from_fn(&d, |z| z.conj());
        let zero = ComplexField::constant(&d, ZERO);
        assert!(matches!(
            HiggsData::new(zero.clone(), anti, zero.clone(), zero.clone(), 0, 0),
            Err(HiggsError::NotHolomorphic { field: "beta", .. })
        ));
        let holo = ComplexField::from_fn(&d, |z| z * z - 0.5 * z.exp());
        assert!(HiggsData::new(holo, zero.clone(), zero.clone(), zero, 0, 0).is_ok());
        let o = Arc::new(ChartGrid::genus2_octagon(64).unwrap());
        assert!(constants(&o, [ZERO; 4], (2, -2)).is_ok());
        assert!(constants(&o, [ZERO; 4], (4, 0)).is_err());
        let neg = HarmonicMetric::new(RealField::constant(&g, 1.0), RealField::constant(&g, -1.0));
        assert!(matches!(neg, Err(HiggsError::NonPositiveMetric { which: "k", .. })));
    }

    #[test]
    fn pullback_examples() {
        let g = torus(8);
        let data = constants(&g, [ONE, ONE, ZERO, ZERO], (0, 0)).unwrap();
        let metric = HarmonicMetric::constant(&g, 1.0, 1.0).unwrap();
        let g1 = pullback_metric(&data, &metric, Factor::First).unwrap();
        assert_eq!(g1.p.value(0), c(4.0, 0.0));
        assert_eq!(g1.m.value(0), 8.0);
        assert_eq!(g1.real_matrix(0), [[16.0, 0.0], [0.0, 0.0]]);
        let vol = pullback_volume_form(&data, &metric, Factor::First).unwrap();
        assert_eq!(vol.sup_norm(), 0.0);
        let g2 = pullback_metric(&data, &metric, Factor::Second).unwrap();
        assert_eq!(g2.m.sup_norm(), 0.0);
    }

    #[test]
    fn quadratic_form_matches_complex_expression() {
        let g = torus(8);
        let data = constants(&g, [c(0.3, 0.7), c(-1.1, 0.2), ZERO, ZERO], (0, 0)).unwrap();
        let metric = HarmonicMetric::constant(&g, 1.0, 1.3).unwrap();
        let pm = pullback_metric(&data, &metric, Factor::First).unwrap();
        let (p, m) = (pm.p.value(0), pm.m.value(0));
        for v in [[1.0, 0.0], [0.3, -2.0], [-1.5, 0.5]] {
            let u = c(v[0], v[1]);
            let direct = (p * u * u + p.conj() * u.conj() * u.conj()).re + m * u.norm_sqr();
            assert!((pm.eval(0, v) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn volume_form_sign_symmetry() {
        let g = torus(8);
        let (a, b, k) = (c(0.4, 0.1), c(1.2, -0.3), 1.6);
        let d1 = constants(&g, [a, b, ZERO, ZERO], (0, 0)).unwrap();
        let d2 = constants(&g, [b, a, ZERO, ZERO], (0, 0)).unwrap();
        let m1 = HarmonicMetric::constant(&g, 1.0, k).unwrap();
        let m2 = HarmonicMetric::constant(&g, 1.0, 1.0 / k).unwrap();
        let v1 = pullback_volume_form(&d1, &m1, Factor::First).unwrap().value(0);
        let v2 = pullback_volume_form(&d2, &m2, Factor::First).unwrap().value(0);
        assert!((v1 + v2).abs() < 1e-14);
    }

    #[test]
    fn fuchsian_volume_form_and_metric() {
        let g = Arc::new(ChartGrid::disk_patch(0.9, 33).unwrap());
        let (data, metric) = fuchsian(&g, FUCHSIAN_SCALE).unwrap();
        let vol = pullback_volume_form(&data, &metric, Factor::First).unwrap();
        let g1 = pullback_metric(&data, &metric, Factor::First).unwrap();
        for i in 0..g.len() {
            if vol.is_valid(i) {
                let r2 = g.node(i).norm_sqr();
                let expect = 4.0 / (1.0 - r2).powi(2);
                assert!((vol.value(i) - expect).abs() < 1e-12 * expect);
                assert!((g1.m.value(i) - expect).abs() < 1e-12 * expect);
                assert_eq!(g1.p.value(i), ZERO);
            }
        }
    }

    #[test]
    fn fuchsian_calibration_is_frozen() {
        // the search minimizes a discretized residual, so its optimum sits
        // O(h²) away from the frozen value and approaches it under refinement
        let shift = |n| {
            let g = Arc::new(ChartGrid::disk_patch(0.5, n).unwrap());
            let s = calibrate_fuchsian_scale(&g, 0.25, 4.0, 1e-9).unwrap();
            ((s - FUCHSIAN_SCALE).abs(), g.spacing())
        };
        let (d1, h1) = shift(33);
        let (d2, h2) = shift(65);
        assert!(d1 < 10.0 * h1 * h1 && d2 < 10.0 * h2 * h2, "{d1} {d2}");
        assert!(d2 < d1 / 3.0, "{d1} {d2}");
    }

    #[test]
    fn euler_requires_closed_chart() {
        let g = Arc::new(ChartGrid::disk_patch(0.5, 16).unwrap());
        let (data, metric) = fuchsian(&g, 1.0).unwrap();
        assert!(matches!(euler_number(&data, &metric, Factor::First), Err(HiggsError::NotClosed)));
    }

    #[test]
    fn domination_examples() {
        let g = Arc::new(ChartGrid::disk_patch(0.8, 17).unwrap());
        let (data, metric) = fuchsian(&g, 1.0).unwrap();
        let g1 = pullback_metric(&data, &metric, Factor::First).unwrap();
        let g2 = pullback_metric(&data, &metric, Factor::Second).unwrap();
        let r = domination_report(&g1, &g2).unwrap();
        assert!(r.dominated && r.margin > 0.0);
        let r = domination_report(&g2, &g1).unwrap();
        assert!(!r.dominated && r.failing_nodes == r.checked_nodes);
        let r = domination_report(&g1, &g1).unwrap();
        assert!(!r.dominated);
    }

    #[test]
    fn pfaffian_examples() {
        let g = torus(8);
        let (a, b) = (c(1.0, 2.0), c(-0.5, 0.1));
        let data = constants(&g, [a, b, a, b], (0, 0)).unwrap();
        assert!(pfaffian_and_hopf(&data, 1e-14).unwrap().pfaffian_vanishes);
        let data = constants(&g, [a, b, ZERO, ZERO], (0, 0)).unwrap();
        let ph = pfaffian_and_hopf(&data, 1e-14).unwrap();
        assert_eq!(ph.pfaffian.value(0), a * b);
        assert_eq!(ph.hopf.value(0), -2.0 * a * b);
    }

    #[test]
    fn char_poly_of_phi() {
        let g = torus(8);
        let v = [c(0.3, 1.0), c(-0.7, 0.2), c(1.5, -0.4), c(0.1, 0.9)];
        let data = constants(&g, v, (0, 0)).unwrap();
        let cp = char_poly(&data.phi(0));
        let (ab, cd) = (v[0] * v[1], v[2] * v[3]);
        assert!(cp[0].norm() < 1e-14 && cp[2].norm() < 1e-14);
        assert!((cp[1] + 2.0 * (ab + cd)).norm() < 1e-13);
        assert!((cp[3] - (ab - cd).powi(2)).norm() < 1e-13);
    }

    #[test]
    fn splitting_classes() {
        assert_eq!(splitting_euler_classes(2, 0).unwrap(), (2, 2));
        assert_eq!(splitting_euler_classes(2, -2).unwrap(), (4, 0));
        assert_eq!(splitting_euler_classes(-4, -4).unwrap(), (0, 8));
        assert!(splitting_euler_classes(3, 0).is_err());
    }
}
