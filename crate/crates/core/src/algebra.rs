//! Small complex matrix algebra on the tensor frame of `C^2 ⊗ C^2`.
//!
//! Coordinates are ordered `(LN, LN⁻¹, L⁻¹N, L⁻¹N⁻¹)`: index `2 i + j` holds
//! the product of basis vector `i` of the first factor with basis vector `j`
//! of the second. Every other module relies on this ordering.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::AlgebraError;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// A vector in the complexified rank-4 bundle, in tensor-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec4(pub [Complex64; 4]);

impl CVec4 {
    pub const fn new(v: [Complex64; 4]) -> Self {
        CVec4(v)
    }

    pub fn zero() -> Self {
        CVec4([ZERO; 4])
    }

    pub fn from_real(v: [f64; 4]) -> Self {
        CVec4(v.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        CVec4(self.0.map(|x| x * c))
    }

    pub fn conj(&self) -> Self {
        CVec4(self.0.map(|x| x.conj()))
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl Index<usize> for CVec4 {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec4 {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for CVec4 {
    type Output = CVec4;
    fn add(self, o: CVec4) -> CVec4 {
        CVec4(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for CVec4 {
    type Output = CVec4;
    fn sub(self, o: CVec4) -> CVec4 {
        CVec4(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for CVec4 {
    type Output = CVec4;
    fn neg(self) -> CVec4 {
        CVec4(self.0.map(|x| -x))
    }
}

/// Square complex matrix, row-major. Only `N = 2` and `N = 4` are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat<const N: usize>(pub [[Complex64; N]; N]);

pub type CMat2 = CMat<2>;
pub type CMat4 = CMat<4>;

impl<const N: usize> CMat<N> {
    pub fn zero() -> Self {
        CMat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn diag(d: [Complex64; N]) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn scale(&self, c: Complex64) -> Self {
        CMat(self.0.map(|row| row.map(|x| x * c)))
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn transpose(&self) -> Self {
        CMat(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i])))
    }

    pub fn commutator(&self, o: &Self) -> Self {
        *self * *o - *o * *self
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..N {
            for j in 0..N {
                m = m.max((self.0[i][j] - o.0[i][j]).norm());
            }
        }
        m
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Complex64 {
        let mut a = self.0;
        let mut det = ONE;
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))
                .unwrap();
            if a[pivot][col].norm() == 0.0 {
                return ZERO;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..N {
                let f = a[r][col] / a[col][col];
                for c in col..N {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
            }
        }
        det
    }
}

impl CMat4 {
    pub fn apply(&self, v: &CVec4) -> CVec4 {
        CVec4(std::array::from_fn(|i| {
            (0..4).map(|j| self.0[i][j] * v.0[j]).sum()
        }))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: [CVec4; 4]) -> Self {
        CMat(std::array::from_fn(|i| std::array::from_fn(|j| cols[j].0[i])))
    }
}

impl CMat2 {
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CMat(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }
}

impl<const N: usize> AddAssign for CMat<N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        CMat(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] - o.0[i][j])))
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        CMat(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..N).map(|k| self.0[i][k] * o.0[k][j]).sum())
        }))
    }
}

/// Kronecker product `A ⊗ B` in the tensor-frame ordering.
pub fn tensor_product(a: &CMat2, b: &CMat2) -> CMat4 {
    let mut m = CMat4::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    m
}

/// `A ⊗ Id + Id ⊗ B`, the induced action of a pair of endomorphisms.
pub fn tensor_sum(a: &CMat2, b: &CMat2) -> CMat4 {
    tensor_product(a, &CMat2::identity()) + tensor_product(&CMat2::identity(), b)
}

/// The split form `Q = ω₁ ⊗ ω₂` with matrix `½ antidiag(-1, 1, 1, -1)`.
pub fn q_form(u: &CVec4, v: &CVec4) -> Complex64 {
    0.5 * (-u[0] * v[3] - u[3] * v[0] + u[1] * v[2] + u[2] * v[1])
}

/// Gram matrix of `q_form` in the tensor frame.
pub fn q_matrix() -> [[f64; 4]; 4] {
    [
        [0.0, 0.0, 0.0, -0.5],
        [0.0, 0.0, 0.5, 0.0],
        [0.0, 0.5, 0.0, 0.0],
        [-0.5, 0.0, 0.0, 0.0],
    ]
}

/// Anti-linear real structure `τ` determined by the diagonal metric `(h, k)`.
///
/// `τ v = (hk v̄₄, h⁻¹k v̄₃, hk⁻¹ v̄₂, h⁻¹k⁻¹ v̄₁)`.
pub fn real_structure(v: &CVec4, h: f64, k: f64) -> CVec4 {
    debug_assert!(h > 0.0 && k > 0.0);
    CVec4([
        v[3].conj() * (h * k),
        v[2].conj() * (k / h),
        v[1].conj() * (h / k),
        v[0].conj() / (h * k),
    ])
}

/// Real coordinates `(Re v₁, Im v₁, Re v₂, Im v₂)` of a `τ`-fixed vector.
///
/// The last two complex coordinates of a real vector are determined by the
/// first two, so this is an isomorphism from the real slice onto `R^4`.
pub fn real_coordinates(v: &CVec4) -> [f64; 4] {
    [v[0].re, v[0].im, v[1].re, v[1].im]
}

/// Eigenvalue sign counts of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub const fn new(positive: usize, negative: usize, zero: usize) -> Self {
        Signature {
            positive,
            negative,
            zero,
        }
    }
}

const SYMMETRY_TOL: f64 = 1e-10;
const ZERO_EIGEN_REL: f64 = 1e-10;

/// Signature of a real symmetric matrix given as rows.
///
/// Eigenvalues with magnitude at most `1e-10 · ‖M‖` count as zero, where
/// `‖M‖` is the Frobenius norm.
pub fn signature(rows: &[Vec<f64>]) -> Result<Signature, AlgebraError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(AlgebraError::NotSquare);
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let scale = m.norm();
    for i in 0..n {
        for j in 0..i {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d > SYMMETRY_TOL * scale.max(1.0) {
                return Err(AlgebraError::NotSymmetric { row: i, col: j, diff: d });
            }
        }
    }
    if scale == 0.0 {
        return Ok(Signature::new(0, 0, n));
    }
    let eig = m.symmetric_eigen();
    let thresh = ZERO_EIGEN_REL * scale;
    let mut s = Signature::new(0, 0, 0);
    for &l in eig.eigenvalues.iter() {
        if l > thresh {
            s.positive += 1;
        } else if l < -thresh {
            s.negative += 1;
        } else {
            s.zero += 1;
        }
    }
    Ok(s)
}

/// Convenience wrapper for fixed-size arrays.
pub fn signature_of<const N: usize>(m: &[[f64; N]; N]) -> Result<Signature, AlgebraError> {
    let rows: Vec<Vec<f64>> = m.iter().map(|r| r.to_vec()).collect();
    signature(&rows)
}
