//! Certified polynomials evaluated at random numeric assignments agree with
//! the floating-point jet pipeline.

use adshiggs::ads::{gram_closed_form, lorentz_metric, FrameJet, JetInput};
use adshiggs::grassmann::f_z_numeric;
use adshiggs::symbolic::certify::f_z_symbolic;
use adshiggs::symbolic::jet::gram_displayed;
use adshiggs::symbolic::{jet_symbols, Assignment, LaurentPoly};
use adshiggs::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 100;
const TOL: f64 = 1e-12;

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= TOL * (1.0 + a.norm().max(b.norm()))
}

fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
}

fn sample(rng: &mut ChaCha8Rng) -> (Assignment, JetInput) {
    let at = Assignment {
        a: random_c(rng),
        b: random_c(rng),
        c: random_c(rng),
        d: random_c(rng),
        h: rng.random_range(0.3..3.0),
        k: rng.random_range(0.3..3.0),
        theta: rng.random_range(0.0..std::f64::consts::TAU),
        w: random_c(rng),
        u: random_c(rng),
    };
    let inp = JetInput {
        alpha: at.a,
        beta: at.b,
        gamma: at.c,
        delta: at.d,
        h: at.h,
        k: at.k,
        c: at.w,
    };
    (at, inp)
}

#[test]
fn jet_vectors_and_scalars_agree() {
    let sym = jet_symbols();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..SAMPLES {
        let (at, inp) = sample(&mut rng);
        let jet = FrameJet::new(inp, at.theta);
        let scalars: [(&LaurentPoly, Complex64); 4] = [(&sym.x, jet.x), (&sym.y, jet.y), (&sym.z, jet.z), (&sym.w, jet.w)];
        for (p, v) in scalars {
            assert!(close(p.eval(&at), v));
        }
        for i in 0..4 {
            assert!(close(sym.s[i].eval(&at), jet.s[i]));
            assert!(close(sym.s_theta[i].eval(&at), jet.s_theta[i]));
            assert!(close(sym.s_z[i].eval(&at), jet.s_z[i]));
            assert!(close(sym.s_zbar[i].eval(&at), jet.s_zbar[i]));
        }
    }
}

#[test]
fn metric_entries_and_determinant_agree() {
    let sym = jet_symbols();
    let gram = gram_displayed(&sym);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..SAMPLES {
        let (at, inp) = sample(&mut rng);
        let jet = FrameJet::new(inp, at.theta);
        let numeric = gram_closed_form(&jet);
        for r in 0..3 {
            for c in 0..3 {
                assert!(close(gram[r][c].eval(&at), numeric[r][c]));
            }
        }
        let xw_yz = (&(&sym.x * &sym.w) - &(&sym.y * &sym.z)).eval(&at);
        let det = lorentz_metric(&jet).complex_det();
        assert!(close(det, -0.25 * xw_yz * xw_yz));
    }
}

#[test]
fn gauss_derivative_agrees() {
    let sym = jet_symbols();
    let fz = f_z_symbolic(&sym);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..SAMPLES {
        let (at, inp) = sample(&mut rng);
        let numeric = f_z_numeric(&FrameJet::new(inp, at.theta));
        for i in 0..6 {
            assert!(close(fz[i].eval(&at), numeric[i]));
        }
    }
}
