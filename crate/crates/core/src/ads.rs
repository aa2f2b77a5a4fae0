//! The tautological section over the unit circle bundle `U`, its jets, the
//! Lorentzian metric it induces, the volume integral and fiber diagnostics.
//!
//! With `g = (k/h)^{1/2}` and `E = e^{iθ}`:
//!
//! ```text
//! s    = (0,  gE,  g⁻¹E⁻¹, 0)        s_θ = (0, igE, −ig⁻¹E⁻¹, 0)
//! s_z  = (X, 0, 0, Y) + c s_θ        s_z̄ = (Z, 0, 0, W) + c̄ s_θ
//! X = γgE + αg⁻¹E⁻¹                  Y = βgE + δg⁻¹E⁻¹
//! Z = h²δ̄gE + k²β̄g⁻¹E⁻¹              W = k⁻²ᾱgE + h⁻²γ̄g⁻¹E⁻¹
//! c = i g⁻¹ ∂_z g
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{q_form, real_coordinates, signature_of, CVec4, Signature, I, ZERO};
use crate::domains::{integrate, ChartGrid, ComplexField, Direction, RealField};
use crate::error::{AdsError, HiggsError};
use crate::higgs::{pullback_volume_form, Factor, HarmonicMetric, HiggsData};

pub const MIN_THETA_SAMPLES: usize = 8;
pub const DEFAULT_THETA_SAMPLES: usize = 16;
const TRANSVERSALITY_FACTOR: f64 = 1e-8;

/// Pointwise inputs of a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetInput {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
    pub h: f64,
    pub k: f64,
    pub c: Complex64,
}

impl JetInput {
    /// `k⁻²|α|² + k²|β|² + h⁻²|γ|² + h²|δ|²`.
    pub fn scale_sq(&self) -> f64 {
        let (h2, k2) = (self.h * self.h, self.k * self.k);
        self.alpha.norm_sqr() / k2 + k2 * self.beta.norm_sqr() + self.gamma.norm_sqr() / h2 + h2 * self.delta.norm_sqr()
    }

    /// θ-average of `XW − YZ`: `|α|²k⁻² + |γ|²h⁻² − |β|²k² − |δ|²h²`.
    pub fn theta_average(&self) -> f64 {
        let (h2, k2) = (self.h * self.h, self.k * self.k);
        self.alpha.norm_sqr() / k2 + self.gamma.norm_sqr() / h2 - self.beta.norm_sqr() * k2 - self.delta.norm_sqr() * h2
    }

    /// `XW − YZ` at angle θ without building the frame vectors.
    pub fn xw_minus_yz(&self, theta: f64) -> f64 {
        let g = (self.k / self.h).sqrt();
        let e = Complex64::from_polar(1.0, theta);
        let (ge, gie) = (e * g, e.conj() / g);
        let (h2, k2) = (self.h * self.h, self.k * self.k);
        let x = self.gamma * ge + self.alpha * gie;
        let y = self.beta * ge + self.delta * gie;
        let z = self.delta.conj() * h2 * ge + self.beta.conj() * k2 * gie;
        let w = self.alpha.conj() / k2 * ge + self.gamma.conj() / h2 * gie;
        (x * w - y * z).re
    }

    pub fn transversality_threshold(&self) -> f64 {
        TRANSVERSALITY_FACTOR * self.scale_sq()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameJet {
    pub theta: f64,
    pub input: JetInput,
    pub g: f64,
    pub c: Complex64,
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
    pub w: Complex64,
    pub s: CVec4,
    pub s_theta: CVec4,
    pub s_z: CVec4,
    pub s_zbar: CVec4,
}

impl FrameJet {
    pub fn new(input: JetInput, theta: f64) -> Self {
        let JetInput {
            alpha,
            beta,
            gamma,
            delta,
            h,
            k,
            c,
        } = input;
        let g = (k / h).sqrt();
        let e = Complex64::from_polar(1.0, theta);
        let ge = e * g;
        let gie = e.conj() / g;
        let x = gamma * ge + alpha * gie;
        let y = beta * ge + delta * gie;
        let z = delta.conj() * (h * h) * ge + beta.conj() * (k * k) * gie;
        let w = alpha.conj() / (k * k) * ge + gamma.conj() / (h * h) * gie;
        let s = CVec4([ZERO, ge, gie, ZERO]);
        let s_theta = CVec4([ZERO, I * ge, -I * gie, ZERO]);
        let s_z = CVec4([x, ZERO, ZERO, y]) + s_theta.scale(c);
        let s_zbar = CVec4([z, ZERO, ZERO, w]) + s_theta.scale(c.conj());
        FrameJet {
            theta,
            input,
            g,
            c,
            x,
            y,
            z,
            w,
            s,
            s_theta,
            s_z,
            s_zbar,
        }
    }

    /// `XW − YZ`, real for every jet.
    pub fn xw_minus_yz(&self) -> Complex64 {
        self.x * self.w - self.y * self.z
    }

    /// `s_x = s_z + s_z̄`, `s_y = i(s_z − s_z̄)`.
    pub fn s_x(&self) -> CVec4 {
        self.s_z + self.s_zbar
    }

    pub fn s_y(&self) -> CVec4 {
        (self.s_z - self.s_zbar).scale(I)
    }

    /// `∂_θ s_z = (X_θ, 0, 0, Y_θ) − c s`.
    pub fn s_theta_z(&self) -> CVec4 {
        let e = Complex64::from_polar(1.0, self.theta);
        let (ge, gie) = (e * self.g, e.conj() / self.g);
        let JetInput { alpha, beta, gamma, delta, .. } = self.input;
        let x_t = I * (gamma * ge - alpha * gie);
        let y_t = I * (beta * ge - delta * gie);
        CVec4([x_t, ZERO, ZERO, y_t]) - self.s.scale(self.c)
    }

    /// `∂_θ s_θ`, differentiating each Fourier mode exactly.
    pub fn d_theta_s_theta(&self) -> CVec4 {
        let v = self.s_theta;
        CVec4([ZERO, I * v[1], -I * v[2], ZERO])
    }

    /// Largest deviation of `Q` on `(s, s_θ)` from the identity.
    pub fn unit_defect(&self) -> f64 {
        let qs = q_form(&self.s, &self.s) - 1.0;
        let qt = q_form(&self.s_theta, &self.s_theta) - 1.0;
        let qst = q_form(&self.s, &self.s_theta);
        qs.norm().max(qt.norm()).max(qst.norm())
    }
}

/// Precomputed `g` and `c` fields for sampling jets on a grid.
#[derive(Debug, Clone)]
pub struct JetSampler<'a> {
    data: &'a HiggsData,
    metric: &'a HarmonicMetric,
    c: ComplexField,
}

impl<'a> JetSampler<'a> {
    pub fn new(data: &'a HiggsData, metric: &'a HarmonicMetric) -> Result<Self, AdsError> {
        let g = metric
            .k
            .zip_with(&metric.h, |k, h| Complex64::new((k / h).sqrt(), 0.0))
            .map_err(HiggsError::from)?;
        let dg = g.derivative(Direction::Dz);
        let c = g.zip_with(&dg, |g, d| I * d / g).map_err(HiggsError::from)?;
        Ok(JetSampler { data, metric, c })
    }

    pub fn grid(&self) -> &Arc<ChartGrid> {
        self.data.grid()
    }

    pub fn c_field(&self) -> &ComplexField {
        &self.c
    }

    /// Inputs at a node with `c` left at zero; enough for quantities in
    /// which `c` cancels.
    pub fn input_without_c(&self, idx: usize) -> JetInput {
        JetInput {
            alpha: self.data.alpha.value(idx),
            beta: self.data.beta.value(idx),
            gamma: self.data.gamma.value(idx),
            delta: self.data.delta.value(idx),
            h: self.metric.h.value(idx),
            k: self.metric.k.value(idx),
            c: ZERO,
        }
    }

    pub fn has_jet(&self, idx: usize) -> bool {
        self.c.is_valid(idx) && self.data.alpha.is_valid(idx) && self.metric.k.is_valid(idx)
    }

    pub fn input(&self, idx: usize) -> Result<JetInput, AdsError> {
        if !self.has_jet(idx) {
            return Err(AdsError::InvalidNode(idx));
        }
        Ok(JetInput {
            c: self.c.value(idx),
            ..self.input_without_c(idx)
        })
    }

    pub fn jet(&self, idx: usize, theta: f64) -> Result<FrameJet, AdsError> {
        Ok(FrameJet::new(self.input(idx)?, theta))
    }
}

pub fn frame_jet(idx: usize, theta: f64, data: &HiggsData, metric: &HarmonicMetric) -> Result<FrameJet, AdsError> {
    JetSampler::new(data, metric)?.jet(idx, theta)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Transversality {
    pub xw_minus_yz: f64,
    pub real_frame_det: f64,
    pub threshold: f64,
    pub transverse: bool,
    /// `|det[s, s_x, s_y, s_θ]| = k²|XW − YZ|` within roundoff.
    pub corroborated: bool,
}

fn real_det4(cols: [[f64; 4]; 4]) -> f64 {
    let m = nalgebra::Matrix4::from_fn(|r, c| cols[c][r]);
    m.determinant()
}

pub fn transversality(jet: &FrameJet) -> Transversality {
    let d = jet.xw_minus_yz().re.abs();
    let cols = [jet.s, jet.s_x(), jet.s_y(), jet.s_theta].map(|v| real_coordinates(&v));
    let det = real_det4(cols).abs();
    let scale = jet.input.scale_sq();
    let threshold = jet.input.transversality_threshold();
    let k2 = jet.input.k * jet.input.k;
    let g2 = jet.g * jet.g;
    // the real frame carries extra factors of g and k; compare scale-free
    let norm = k2 * (scale * (1.0 + g2 + 1.0 / g2)).max(f64::MIN_POSITIVE);
    Transversality {
        xw_minus_yz: d,
        real_frame_det: det,
        threshold,
        transverse: d > threshold,
        corroborated: (det - k2 * d).abs() <= 1e-10 * norm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzMetric {
    #[serde(skip)]
    pub complex: [[Complex64; 3]; 3],
    pub real: [[f64; 3]; 3],
    pub signature: Signature,
}

impl LorentzMetric {
    pub fn complex_det(&self) -> Complex64 {
        det3(&self.complex)
    }

    pub fn real_det(&self) -> f64 {
        let r = self.real.map(|row| row.map(|v| Complex64::new(v, 0.0)));
        det3(&r).re
    }
}

fn det3(m: &[[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// The complex-frame Gram matrix from its closed-form entries.
pub fn gram_closed_form(jet: &FrameJet) -> [[Complex64; 3]; 3] {
    let (x, y, z, w, c) = (jet.x, jet.y, jet.z, jet.w, jet.c);
    let cb = c.conj();
    let off = -0.5 * (x * w + y * z) + c * cb;
    [
        [-x * y + c * c, off, c],
        [off, -z * w + cb * cb, cb],
        [c, cb, Complex64::new(1.0, 0.0)],
    ]
}

/// The complex-frame Gram matrix from `Q` on `(s_z, s_z̄, s_θ)`.
pub fn gram_from_frame(jet: &FrameJet) -> [[Complex64; 3]; 3] {
    let b = [jet.s_z, jet.s_zbar, jet.s_theta];
    std::array::from_fn(|i| std::array::from_fn(|j| q_form(&b[i], &b[j])))
}

pub fn lorentz_metric(jet: &FrameJet) -> LorentzMetric {
    let g = gram_closed_form(jet);
    // columns: s_x = s_z + s_z̄, s_y = i(s_z − s_z̄), s_θ
    let jm = [
        [Complex64::new(1.0, 0.0), I, ZERO],
        [Complex64::new(1.0, 0.0), -I, ZERO],
        [ZERO, ZERO, Complex64::new(1.0, 0.0)],
    ];
    let mut real = [[0.0; 3]; 3];
    for (a, row) in real.iter_mut().enumerate() {
        for (b, out) in row.iter_mut().enumerate() {
            let mut acc = ZERO;
            for i in 0..3 {
                for j in 0..3 {
                    acc += jm[i][a] * g[i][j] * jm[j][b];
                }
            }
            *out = acc.re;
        }
    }
    // symmetrize away roundoff
    for a in 0..3 {
        for b in a + 1..3 {
            let m = 0.5 * (real[a][b] + real[b][a]);
            real[a][b] = m;
            real[b][a] = m;
        }
    }
    let signature = signature_of(&real).expect("symmetrized");
    LorentzMetric {
        complex: g,
        real,
        signature,
    }
}

fn theta_samples(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
}

/// `∫₀^{2π} |XW − YZ| dθ` per node by the trapezoid rule. `c` cancels from
/// `XW − YZ`, so every sampled node contributes.
pub fn volume_density(data: &HiggsData, metric: &HarmonicMetric, n_theta: usize) -> Result<RealField, AdsError> {
    if n_theta < MIN_THETA_SAMPLES {
        return Err(AdsError::TooFewAngles(n_theta));
    }
    let ab = data.alpha.zip_with(&data.beta, |a, b| (a, b)).map_err(HiggsError::from)?;
    let cd = data.gamma.zip_with(&data.delta, |c, d| (c, d)).map_err(HiggsError::from)?;
    let hk = metric.h.zip_with(&metric.k, |h, k| (h, k)).map_err(HiggsError::from)?;
    let abcd = ab.zip_with(&cd, |p, q| (p, q)).map_err(HiggsError::from)?;
    let f = abcd
        .zip_with(&hk, move |((alpha, beta), (gamma, delta)), (h, k)| {
            let input = JetInput {
                alpha,
                beta,
                gamma,
                delta,
                h,
                k,
                c: ZERO,
            };
            let sum: f64 = theta_samples(n_theta)
                .map(|t| input.xw_minus_yz(t).abs())
                .sum();
            sum * 2.0 * PI / n_theta as f64
        })
        .map_err(HiggsError::from)?;
    Ok(f)
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeReport {
    pub n_theta: usize,
    pub measured: f64,
    pub theta_analytic: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub cross_check: f64,
    pub non_transverse_nodes: usize,
}

/// Volume `∫ |XW − YZ| dx dy dθ` over the fundamental domain.
pub fn ads_volume(data: &HiggsData, metric: &HarmonicMetric, n_theta: usize) -> Result<VolumeReport, AdsError> {
    let grid = data.grid().clone();
    if !grid.is_closed() {
        return Err(AdsError::NotClosed);
    }
    let density = volume_density(data, metric, n_theta)?;
    let measured = integrate(&density).map_err(HiggsError::from)?;
    let sampler = JetSampler::new(data, metric)?;
    let (analytic_vals, flags): (Vec<f64>, Vec<bool>) = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !density.is_valid(i) {
                return (0.0, false);
            }
            let input = sampler.input_without_c(i);
            let threshold = input.transversality_threshold();
            let bad = theta_samples(64).any(|t| input.xw_minus_yz(t).abs() <= threshold);
            (2.0 * PI * input.theta_average().abs(), bad && grid.weights()[i] > 0.0)
        })
        .unzip();
    let analytic_field =
        RealField::new(grid.clone(), analytic_vals, density.valid_mask().to_vec()).map_err(HiggsError::from)?;
    let theta_analytic = integrate(&analytic_field).map_err(HiggsError::from)?;
    let v1 = integrate(&pullback_volume_form(data, metric, Factor::First)?).map_err(HiggsError::from)?;
    let v2 = integrate(&pullback_volume_form(data, metric, Factor::Second)?).map_err(HiggsError::from)?;
    let predicted = PI * PI * (data.e1 + data.e2).abs() as f64;
    Ok(VolumeReport {
        n_theta,
        measured,
        theta_analytic,
        predicted,
        ratio: if predicted == 0.0 { f64::NAN } else { measured / predicted },
        cross_check: 0.5 * PI * (v1 + v2).abs(),
        non_transverse_nodes: flags.iter().filter(|b| **b).count(),
    })
}

/// `|XW − YZ|` at a fixed θ on every node.
pub fn xw_minus_yz_field(data: &HiggsData, metric: &HarmonicMetric, theta: f64) -> Result<RealField, AdsError> {
    let sampler = JetSampler::new(data, metric)?;
    let valid = data.alpha.valid_mask().to_vec();
    let values = (0..valid.len())
        .map(|i| {
            if valid[i] {
                sampler.input_without_c(i).xw_minus_yz(theta).abs()
            } else {
                0.0
            }
        })
        .collect();
    Ok(RealField::new(data.grid().clone(), values, valid).map_err(HiggsError::from)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberReport {
    pub node: usize,
    pub samples: usize,
    pub geodesic_residual: f64,
    pub timelike_defect: f64,
    pub winding: i64,
    pub winding_component3: i64,
}

fn winding(values: &[Complex64]) -> i64 {
    let n = values.len();
    let total: f64 = (0..n).map(|j| (values[(j + 1) % n] / values[j]).arg()).sum();
    (total / (2.0 * PI)).round() as i64
}

pub fn fiber_report(sampler: &JetSampler, idx: usize, n_theta: usize) -> Result<FiberReport, AdsError> {
    if n_theta < MIN_THETA_SAMPLES {
        return Err(AdsError::TooFewAngles(n_theta));
    }
    let input = sampler.input(idx)?;
    let jets: Vec<FrameJet> = theta_samples(n_theta).map(|t| FrameJet::new(input, t)).collect();
    let geodesic_residual = jets
        .iter()
        .map(|j| (j.d_theta_s_theta() + j.s).norm_inf())
        .fold(0.0, f64::max);
    let timelike_defect = jets
        .iter()
        .map(|j| (q_form(&j.s_theta, &j.s_theta) - 1.0).norm())
        .fold(0.0, f64::max);
    let comp = |k: usize| jets.iter().map(|j| j.s[k]).collect::<Vec<_>>();
    Ok(FiberReport {
        node: idx,
        samples: n_theta,
        geodesic_residual,
        timelike_defect,
        winding: winding(&comp(1)),
        winding_component3: winding(&comp(2)),
    })
}
