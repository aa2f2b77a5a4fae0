//! The formal frame jet of the tautological section over the circle bundle.

use super::poly::{GaussRat, LaurentPoly, Symbol};
use Symbol::*;

pub type PolyVec4 = [LaurentPoly; 4];
pub type PolyPlucker = [LaurentPoly; 6];

/// Symbolic `s, s_θ, s_z, s_z̄` and the scalars `X, Y, Z, W`.
///
/// The jet scalar `c = i g⁻¹ ∂g` is carried as the free symbol `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSymbols {
    pub s: PolyVec4,
    pub s_theta: PolyVec4,
    pub s_z: PolyVec4,
    pub s_zbar: PolyVec4,
    pub x: LaurentPoly,
    pub y: LaurentPoly,
    pub z: LaurentPoly,
    pub w: LaurentPoly,
    pub c: LaurentPoly,
    pub c_bar: LaurentPoly,
}

fn mono(p: &[(Symbol, i32)]) -> LaurentPoly {
    LaurentPoly::monomial(p)
}

fn scale(v: &PolyVec4, c: &LaurentPoly) -> PolyVec4 {
    std::array::from_fn(|i| &v[i] * c)
}

fn add(u: &PolyVec4, v: &PolyVec4) -> PolyVec4 {
    std::array::from_fn(|i| &u[i] + &v[i])
}

pub fn jet_symbols() -> JetSymbols {
    let zero = LaurentPoly::zero();
    let i = LaurentPoly::i();
    let g_e = mono(&[(G, 1), (E, 1)]);
    let ginv_einv = mono(&[(G, -1), (E, -1)]);

    let s = [zero.clone(), g_e.clone(), ginv_einv.clone(), zero.clone()];
    let s_theta = [zero.clone(), &i * &g_e, -(&i * &ginv_einv), zero.clone()];

    let x = &mono(&[(C, 1), (G, 1), (E, 1)]) + &mono(&[(A, 1), (G, -1), (E, -1)]);
    let y = &mono(&[(B, 1), (G, 1), (E, 1)]) + &mono(&[(D, 1), (G, -1), (E, -1)]);
    let z = &mono(&[(H, 2), (DBar, 1), (G, 1), (E, 1)])
        + &mono(&[(K, 2), (BBar, 1), (G, -1), (E, -1)]);
    let w = &mono(&[(K, -2), (ABar, 1), (G, 1), (E, 1)])
        + &mono(&[(H, -2), (CBar, 1), (G, -1), (E, -1)]);

    let c = LaurentPoly::sym(W);
    let c_bar = LaurentPoly::sym(WBar);

    let s_z = add(
        &[x.clone(), zero.clone(), zero.clone(), y.clone()],
        &scale(&s_theta, &c),
    );
    let s_zbar = add(
        &[z.clone(), zero.clone(), zero.clone(), w.clone()],
        &scale(&s_theta, &c_bar),
    );

    JetSymbols {
        s,
        s_theta,
        s_z,
        s_zbar,
        x,
        y,
        z,
        w,
        c,
        c_bar,
    }
}

/// `Q(u, v) = ½(−u₁v₄ − u₄v₁ + u₂v₃ + u₃v₂)`.
pub fn q_form_sym(u: &PolyVec4, v: &PolyVec4) -> LaurentPoly {
    let sum = &(&(&u[1] * &v[2]) + &(&u[2] * &v[1])) - &(&(&u[0] * &v[3]) + &(&u[3] * &v[0]));
    sum.scale(&GaussRat::ratio(1, 2))
}

/// Plücker minors in the order `(p12, p13, p14, p23, p24, p34)`.
pub fn plucker_sym(u: &PolyVec4, v: &PolyVec4) -> PolyPlucker {
    const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    PAIRS.map(|(i, j)| &(&u[i] * &v[j]) - &(&u[j] * &v[i]))
}

/// The wedge pairing on `Λ²` read against `e1∧e2∧e3∧e4`.
pub fn wedge_form_sym(p: &PolyPlucker, q: &PolyPlucker) -> LaurentPoly {
    let t1 = &(&p[0] * &q[5]) + &(&p[5] * &q[0]);
    let t2 = &(&p[1] * &q[4]) + &(&p[4] * &q[1]);
    let t3 = &(&p[2] * &q[3]) + &(&p[3] * &q[2]);
    &(&t1 - &t2) + &t3
}

pub fn d_theta_vec(v: &PolyVec4) -> PolyVec4 {
    std::array::from_fn(|i| v[i].d_theta())
}

/// Determinant of a symbolic 3×3 matrix by cofactor expansion.
pub fn det3(m: &[[LaurentPoly; 3]; 3]) -> LaurentPoly {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
        &(&m[r1][c1] * &m[r2][c2]) - &(&m[r1][c2] * &m[r2][c1])
    };
    let t0 = &m[0][0] * &minor(1, 2, 1, 2);
    let t1 = &m[0][1] * &minor(1, 2, 0, 2);
    let t2 = &m[0][2] * &minor(1, 2, 0, 1);
    &(&t0 - &t1) + &t2
}

/// The Lorentzian Gram matrix in the basis `(s_z, s_z̄, s_θ)`, computed
/// from the jet vectors themselves.
pub fn gram_from_vectors(jet: &JetSymbols) -> [[LaurentPoly; 3]; 3] {
    let basis = [&jet.s_z, &jet.s_zbar, &jet.s_theta];
    std::array::from_fn(|i| std::array::from_fn(|j| q_form_sym(basis[i], basis[j])))
}

/// The Gram matrix as displayed entry by entry in terms of `X, Y, Z, W, c`.
pub fn gram_displayed(jet: &JetSymbols) -> [[LaurentPoly; 3]; 3] {
    let half = GaussRat::ratio(1, 2);
    let zz = &(-(&jet.x * &jet.y)) + &(&jet.c * &jet.c);
    let bb = &(-(&jet.z * &jet.w)) + &(&jet.c_bar * &jet.c_bar);
    let zb = &(&(&jet.x * &jet.w) + &(&jet.y * &jet.z)).scale(&(-&half)) + &(&jet.c * &jet.c_bar);
    [
        [zz, zb.clone(), jet.c.clone()],
        [zb, bb, jet.c_bar.clone()],
        [jet.c.clone(), jet.c_bar.clone(), LaurentPoly::one()],
    ]
}
