//! Explicit solutions on the disk, octagon and torus.

use std::f64::consts::PI;
use std::sync::Arc;

use adshiggs::ads::{ads_volume, JetSampler};
use adshiggs::domains::{integrate, octagon_vertex_radius, octagon_vertices, ChartGrid, ComplexField, Direction, RealField};
use adshiggs::grassmann::{conformality_report, gauss_derivative};
use adshiggs::higgs::{
    domination_report, euler_number, fuchsian, pfaffian_and_hopf, pullback_metric, pullback_volume_form,
    solve_hitchin_torus, Factor, HarmonicMetric, HiggsData, FUCHSIAN_SCALE, MAX_NEWTON_STEPS,
};
use adshiggs::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn octagon(n: usize) -> Arc<ChartGrid> {
    Arc::new(ChartGrid::genus2_octagon(n).unwrap())
}

/// Interior angle at a vertex of the regular octagon whose vertices sit at
/// Euclidean radius `r`, computed from the two side circles through it.
fn vertex_angle(r: f64) -> f64 {
    let v0 = Complex64::from_polar(r, PI / 8.0);
    let side_center = |phi: f64| {
        let d = (r * r + 1.0) / (2.0 * r * (PI / 8.0).cos());
        Complex64::from_polar(d, phi)
    };
    // sides adjacent to v0 have midpoints at angles 0 and π/4
    let tangent_towards = |center: Complex64, other: Complex64| {
        let radial = v0 - center;
        let t = Complex64::new(-radial.im, radial.re);
        if ((other - v0).conj() * t).re > 0.0 {
            t
        } else {
            -t
        }
    };
    let v_prev = Complex64::from_polar(r, -PI / 8.0);
    let v_next = Complex64::from_polar(r, 3.0 * PI / 8.0);
    let t1 = tangent_towards(side_center(0.0), v_prev);
    let t2 = tangent_towards(side_center(PI / 4.0), v_next);
    (t2 / t1).arg().abs()
}

#[test]
fn vertex_radius_root_solve() {
    // angle decreases from π·3/4 (Euclidean octagon) to 0 (ideal octagon)
    let (mut lo, mut hi) = (0.05, 0.999);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if vertex_angle(mid) > PI / 4.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((0.5 * (lo + hi) - octagon_vertex_radius()).abs() < 1e-12);
    for v in octagon_vertices() {
        assert!((v.norm() - 2f64.powf(-0.25)).abs() < 1e-15);
    }
}

#[test]
fn fuchsian_metric_has_curvature_minus_one() {
    // K = −Δ log ρ / (2ρ) for ρ(dx² + dy²)
    let g = Arc::new(ChartGrid::disk_patch(0.7, 129).unwrap());
    let (data, metric) = fuchsian(&g, FUCHSIAN_SCALE).unwrap();
    let g1 = pullback_metric(&data, &metric, Factor::First).unwrap();
    let log_rho = g1.m.map(f64::ln).to_complex();
    let lap = log_rho.derivative(Direction::Dz).derivative(Direction::Dzbar).map(|v| 4.0 * v.re);
    let k = lap.zip_with(&g1.m, |l, rho| -l / (2.0 * rho)).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        if k.is_valid(i) && g.is_inside(i) {
            worst = worst.max((k.value(i) + 1.0).abs());
        }
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn octagon_euler_numbers() {
    let g = octagon(128);
    let (data, metric) = fuchsian(&g, FUCHSIAN_SCALE).unwrap();
    let e = euler_number(&data, &metric, Factor::First).unwrap();
    assert!((e.value - 2.0).abs() < 2e-2 && e.nearest_even == 2);
    assert!(euler_number(&data, &metric, Factor::Second).unwrap().value.abs() < 1e-15);

    // α ↔ β with k ↔ k⁻¹
    let swapped = HiggsData::new(
        data.beta.clone(),
        data.alpha.clone(),
        data.gamma.clone(),
        data.delta.clone(),
        -2,
        0,
    )
    .unwrap();
    let inv = HarmonicMetric::new(metric.h.clone(), metric.k.map(|k| 1.0 / k)).unwrap();
    let e = euler_number(&swapped, &inv, Factor::First).unwrap();
    assert!((e.value + 2.0).abs() < 2e-2 && e.nearest_even == -2);
}

#[test]
fn octagon_volume_small_grid_and_refinement() {
    let coarse = {
        let g = octagon(128);
        let (data, metric) = fuchsian(&g, FUCHSIAN_SCALE).unwrap();
        ads_volume(&data, &metric, 16).unwrap()
    };
    let fine = {
        let g = octagon(256);
        let (data, metric) = fuchsian(&g, FUCHSIAN_SCALE).unwrap();
        ads_volume(&data, &metric, 8).unwrap()
    };
    let target = 2.0 * PI * PI;
    assert!((coarse.measured / target - 1.0).abs() < 1e-2);
    assert!((fine.measured / target - 1.0).abs() < 1e-2);
    assert!((fine.measured - fine.theta_analytic).abs() < 1e-12 * target);
    assert_eq!(fine.non_transverse_nodes, 0);
    assert!((fine.predicted - target).abs() < 1e-12);
}

#[test]
fn octagon_domination_and_conformality() {
    let g = octagon(64);
    let (data, metric) = fuchsian(&g, FUCHSIAN_SCALE).unwrap();
    let g1 = pullback_metric(&data, &metric, Factor::First).unwrap();
    let g2 = pullback_metric(&data, &metric, Factor::Second).unwrap();
    let rep = domination_report(&g1, &g2).unwrap();
    assert!(rep.dominated && rep.margin > 0.0);
    let (conf, field) = conformality_report(&data, &metric, 1e-12).unwrap();
    assert!(conf.minimal && conf.wedge_defect < 1e-12);
    assert_eq!(conf.immersion_nodes, conf.checked_nodes);
    assert!(field.sup_norm() < 1e-12);
    let d = gauss_derivative(&data, &metric, 0.3).unwrap();
    assert!(!d.flagged && d.holomorphy_residual == 0.0);
    let sampler = JetSampler::new(&data, &metric).unwrap();
    let center = g.nearest(ZERO);
    assert_eq!(d.numeric.value(center).0[0], c(0.0, 2.0));
    // even n: the nearest node sits half a cell off the origin, where c ≈ −i z̄ / 2
    assert!(sampler.jet(center, 0.0).unwrap().c.norm() < g.spacing());
}

#[test]
fn zero_field_is_degenerate_everywhere() {
    let g = octagon(64);
    let zero = ComplexField::constant(&g, ZERO);
    let data = HiggsData::new(zero.clone(), zero.clone(), zero.clone(), zero, 0, 0).unwrap();
    let metric = HarmonicMetric::constant(&g, 1.0, 1.0).unwrap();
    assert_eq!(euler_number(&data, &metric, Factor::First).unwrap().value, 0.0);
    let v = ads_volume(&data, &metric, 16).unwrap();
    assert_eq!(v.measured, 0.0);
    let (conf, _) = conformality_report(&data, &metric, 1e-12).unwrap();
    assert_eq!(conf.immersion_nodes, 0);
}

#[test]
fn conformality_against_unit_pfaffian() {
    // α = 1, β = 1 + z, γ = z, δ = 1: αβ − γδ ≡ 1
    let g = Arc::new(ChartGrid::disk_patch(0.6, 32).unwrap());
    let f = |e: fn(Complex64) -> Complex64| ComplexField::from_fn(&g, e);
    let data = HiggsData::new(f(|_| ONE), f(|z| 1.0 + z), f(|z| z), f(|_| ONE), 0, 0).unwrap();
    let metric = HarmonicMetric::new(
        RealField::from_fn(&g, |z| 1.0 + 0.2 * z.re),
        RealField::from_fn(&g, |z| (0.3 * z.im).exp()),
    )
    .unwrap();
    let (conf, field) = conformality_report(&data, &metric, 1e-12).unwrap();
    assert!(!conf.minimal);
    for i in 0..g.len() {
        if field.is_valid(i) {
            assert!((field.value(i) + 8.0).norm() < 1e-10);
        }
    }
    let ph = pfaffian_and_hopf(&data, 1e-12).unwrap();
    assert!((ph.pfaffian.value(g.nearest(c(0.1, 0.1))) - 1.0).norm() < 1e-14);
}

#[test]
fn gauss_derivative_is_theta_independent() {
    let g = Arc::new(ChartGrid::disk_patch(0.6, 24).unwrap());
    let f = |e: fn(Complex64) -> Complex64| ComplexField::from_fn(&g, e);
    let data = HiggsData::new(f(|z| 0.5 + z), f(|z| z * z - 1.0), f(|_| c(0.3, 0.2)), f(|z| 2.0 * z), 0, 0).unwrap();
    let metric = HarmonicMetric::new(
        RealField::from_fn(&g, |z| 1.0 + 0.3 * z.norm_sqr()),
        RealField::from_fn(&g, |z| 2.0 - z.re),
    )
    .unwrap();
    let a = gauss_derivative(&data, &metric, 0.0).unwrap();
    let b = gauss_derivative(&data, &metric, PI / 3.0).unwrap();
    assert!(!a.flagged && !b.flagged);
    for i in 0..g.len() {
        if a.numeric.is_valid(i) {
            assert!((a.numeric.value(i) - b.numeric.value(i)).norm_inf() < 1e-12);
        }
    }
    assert!(a.holomorphy_residual < 1e-10);
}

#[test]
fn torus_volume_forms_integrate_to_even_multiples() {
    let g = Arc::new(ChartGrid::torus(16, c(0.3, 0.9)).unwrap());
    let f = |v| ComplexField::constant(&g, v);
    let data = HiggsData::new(f(c(1.0, 1.0)), f(c(0.5, 0.0)), f(c(0.0, 2.0)), f(c(1.5, -0.5)), 0, 0).unwrap();
    let init = HarmonicMetric::constant(&g, 1.0, 1.0).unwrap();
    let (metric, _) = solve_hitchin_torus(&data, &init, 1e-10, MAX_NEWTON_STEPS).unwrap();
    for which in [Factor::First, Factor::Second] {
        let e = euler_number(&data, &metric, which).unwrap();
        assert!(e.distance < 1e-9 && e.nearest_even == 0);
        let vol = pullback_volume_form(&data, &metric, which).unwrap();
        assert!(integrate(&vol).unwrap().abs() < 1e-9);
    }
}

#[test]
fn disk_patch_genus_only_checks_parity() {
    let g = Arc::new(ChartGrid::disk_patch(0.5, 16).unwrap());
    let zero = ComplexField::constant(&g, ZERO);
    assert!(HiggsData::new(zero.clone(), zero.clone(), zero.clone(), zero.clone(), 6, -4).is_ok());
    assert!(HiggsData::new(zero.clone(), zero.clone(), zero.clone(), zero, 3, 0).is_err());
}
