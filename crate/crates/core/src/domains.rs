//! Discretized coordinate charts: a flat torus, a patch of the Poincaré disk,
//! and the regular hyperbolic octagon that tiles a genus-2 surface.
//!
//! Nodes are stored row-major, `index = j * n + i` with `i` along the first
//! grid direction. Disk and octagon grids are uniform on a bounding square;
//! a node's quadrature weight is its cell area clipped by a 4×4 supersampled
//! inside test. Torus grids are periodic with equal weights.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::DomainError;

const SUPERSAMPLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChartKind {
    Torus { modulus_re: f64, modulus_im: f64 },
    DiskPatch { radius: f64 },
    Octagon { vertex_radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Dz,
    Dzbar,
    Dx,
    Dy,
}

#[derive(Debug, Clone)]
pub struct ChartGrid {
    kind: ChartKind,
    n: usize,
    spacing: f64,
    origin: f64,
    z: Vec<Complex64>,
    weights: Vec<f64>,
    inside: Vec<bool>,
}

/// Euclidean radius of the vertices of the regular hyperbolic octagon with
/// interior angles `π/4`, from `cosh R = cot²(π/8)` and `r = tanh(R/2)`.
pub fn octagon_vertex_radius() -> f64 {
    let cot = 1.0 / (PI / 8.0).tan();
    let cosh_r = cot * cot;
    ((cosh_r - 1.0) / (cosh_r + 1.0)).sqrt()
}

/// Vertices at angles `(k + ½)·π/4`, so side midpoints lie on the axes.
pub fn octagon_vertices() -> [Complex64; 8] {
    let r = octagon_vertex_radius();
    std::array::from_fn(|k| Complex64::from_polar(r, (k as f64 + 0.5) * PI / 4.0))
}

/// Centers and radius of the eight side geodesics (circles orthogonal to
/// the unit circle).
fn octagon_side_circles() -> ([Complex64; 8], f64) {
    let r = octagon_vertex_radius();
    let half = PI / 8.0;
    let d = (r * r + 1.0) / (2.0 * r * half.cos());
    let rho2 = d * d - 1.0;
    (
        std::array::from_fn(|k| Complex64::from_polar(d, (k as f64 + 1.0) * PI / 4.0)),
        rho2,
    )
}

pub fn in_octagon(z: Complex64) -> bool {
    if z.norm_sqr() >= 1.0 {
        return false;
    }
    let (centers, rho2) = octagon_side_circles();
    centers.iter().all(|c| (z - c).norm_sqr() > rho2)
}

impl ChartGrid {
    pub fn torus(n: usize, modulus: Complex64) -> Result<Self, DomainError> {
        if n < 8 {
            return Err(DomainError::TooFewNodes { n, min: 8 });
        }
        if !(modulus.im > 0.0) || !modulus.re.is_finite() || !modulus.im.is_finite() {
            return Err(DomainError::DegenerateModulus(modulus.im));
        }
        let step = 1.0 / n as f64;
        let z = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                Complex64::new(i as f64 * step, 0.0) + modulus * (j as f64 * step)
            })
            .collect();
        let w = modulus.im * step * step;
        Ok(ChartGrid {
            kind: ChartKind::Torus {
                modulus_re: modulus.re,
                modulus_im: modulus.im,
            },
            n,
            spacing: step,
            origin: 0.0,
            z,
            weights: vec![w; n * n],
            inside: vec![true; n * n],
        })
    }

    pub fn disk_patch(radius: f64, n: usize) -> Result<Self, DomainError> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(DomainError::RadiusOutOfRange(radius));
        }
        if n < 8 {
            return Err(DomainError::TooFewNodes { n, min: 8 });
        }
        let r2 = radius * radius;
        Ok(Self::masked(
            ChartKind::DiskPatch { radius },
            n,
            radius,
            move |z: Complex64| z.norm_sqr() <= r2,
        ))
    }

    pub fn genus2_octagon(n: usize) -> Result<Self, DomainError> {
        if n < 64 {
            return Err(DomainError::TooFewNodes { n, min: 64 });
        }
        let r = octagon_vertex_radius();
        Ok(Self::masked(
            ChartKind::Octagon { vertex_radius: r },
            n,
            r,
            in_octagon,
        ))
    }

    fn masked(kind: ChartKind, n: usize, half_width: f64, inside: impl Fn(Complex64) -> bool + Sync) -> Self {
        let h = 2.0 * half_width / (n - 1) as f64;
        let origin = -half_width;
        let sub = h / SUPERSAMPLE as f64;
        let cells: Vec<(Complex64, f64, bool)> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                let z = Complex64::new(origin + i as f64 * h, origin + j as f64 * h);
                let mut count = 0;
                for a in 0..SUPERSAMPLE {
                    for b in 0..SUPERSAMPLE {
                        let p = z + Complex64::new(
                            (a as f64 + 0.5) * sub - h / 2.0,
                            (b as f64 + 0.5) * sub - h / 2.0,
                        );
                        if inside(p) {
                            count += 1;
                        }
                    }
                }
                let w = h * h * count as f64 / (SUPERSAMPLE * SUPERSAMPLE) as f64;
                (z, w, inside(z))
            })
            .collect();
        ChartGrid {
            kind,
            n,
            spacing: h,
            origin,
            z: cells.iter().map(|c| c.0).collect(),
            weights: cells.iter().map(|c| c.1).collect(),
            inside: cells.iter().map(|c| c.2).collect(),
        }
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.z
    }

    pub fn node(&self, idx: usize) -> Complex64 {
        self.z[idx]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, ChartKind::Torus { .. })
    }

    /// Closed-surface fundamental domains: torus and octagon.
    pub fn is_closed(&self) -> bool {
        !matches!(self.kind, ChartKind::DiskPatch { .. })
    }

    /// Genus of the surface the chart represents, if closed.
    pub fn genus(&self) -> Option<u32> {
        match self.kind {
            ChartKind::Torus { .. } => Some(1),
            ChartKind::Octagon { .. } => Some(2),
            ChartKind::DiskPatch { .. } => None,
        }
    }

    /// Whether the node belongs to the sampled region (inside, or carrying
    /// quadrature weight).
    pub fn in_support(&self, idx: usize) -> bool {
        self.inside[idx] || self.weights[idx] > 0.0
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the node nearest to `z` (disk and octagon grids).
    pub fn nearest(&self, z: Complex64) -> usize {
        if self.is_periodic() {
            return (0..self.len())
                .min_by(|&a, &b| (self.z[a] - z).norm().total_cmp(&(self.z[b] - z).norm()))
                .unwrap();
        }
        let clamp = |v: f64| ((v - self.origin) / self.spacing).round().clamp(0.0, (self.n - 1) as f64) as usize;
        clamp(z.im) * self.n + clamp(z.re)
    }

    fn neighbor(&self, idx: usize, di: isize, dj: isize) -> Option<usize> {
        let n = self.n as isize;
        let (i, j) = ((idx % self.n) as isize + di, (idx / self.n) as isize + dj);
        if self.is_periodic() {
            Some((j.rem_euclid(n) * n + i.rem_euclid(n)) as usize)
        } else if (0..n).contains(&i) && (0..n).contains(&j) {
            Some((j * n + i) as usize)
        } else {
            None
        }
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            schema: 1,
            chart: self.kind,
            n: self.n,
            node_count: self.len(),
            spacing: self.spacing,
            total_weight: self.total_weight(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridMeta {
    pub schema: u32,
    pub chart: ChartKind,
    pub n: usize,
    pub node_count: usize,
    pub spacing: f64,
    pub total_weight: f64,
}

/// One sample per node plus a validity mask.
#[derive(Debug, Clone)]
pub struct Field<T> {
    grid: Arc<ChartGrid>,
    values: Vec<T>,
    valid: Vec<bool>,
}

pub type ComplexField = Field<Complex64>;
pub type RealField = Field<f64>;

impl<T: Copy + Default + Send + Sync> Field<T> {
    pub fn new(grid: Arc<ChartGrid>, values: Vec<T>, valid: Vec<bool>) -> Result<Self, DomainError> {
        if values.len() != grid.len() || valid.len() != grid.len() {
            return Err(DomainError::ShapeMismatch {
                expected: grid.len(),
                got: values.len().min(valid.len()),
            });
        }
        Ok(Field { grid, values, valid })
    }

    /// Samples `f` on every node in the chart's support.
    pub fn from_fn(grid: &Arc<ChartGrid>, f: impl Fn(Complex64) -> T + Sync) -> Self {
        let valid: Vec<bool> = (0..grid.len()).map(|i| grid.in_support(i)).collect();
        let values = grid
            .nodes()
            .par_iter()
            .zip(valid.par_iter())
            .map(|(&z, &ok)| if ok { f(z) } else { T::default() })
            .collect();
        Field {
            grid: grid.clone(),
            values,
            valid,
        }
    }

    /// Like [`Field::from_fn`] but a failing sample aborts.
    pub fn try_from_fn<E: Send>(
        grid: &Arc<ChartGrid>,
        f: impl Fn(Complex64) -> Result<T, E> + Sync,
    ) -> Result<Self, E> {
        let valid: Vec<bool> = (0..grid.len()).map(|i| grid.in_support(i)).collect();
        let values = grid
            .nodes()
            .par_iter()
            .zip(valid.par_iter())
            .map(|(&z, &ok)| if ok { f(z) } else { Ok(T::default()) })
            .collect::<Result<Vec<T>, E>>()?;
        Ok(Field {
            grid: grid.clone(),
            values,
            valid,
        })
    }

    pub fn constant(grid: &Arc<ChartGrid>, v: T) -> Self {
        Self::from_fn(grid, |_| v)
    }

    pub fn grid(&self) -> &Arc<ChartGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> T {
        self.values[idx]
    }

    pub fn is_valid(&self, idx: usize) -> bool {
        self.valid[idx]
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn same_grid<U>(&self, other: &Field<U>) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    pub fn map<U: Copy + Default + Send + Sync>(&self, f: impl Fn(T) -> U + Sync) -> Field<U> {
        let values = self
            .values
            .par_iter()
            .zip(self.valid.par_iter())
            .map(|(&v, &ok)| if ok { f(v) } else { U::default() })
            .collect();
        Field {
            grid: self.grid.clone(),
            values,
            valid: self.valid.clone(),
        }
    }

    /// Node-wise combination; the result is valid where both inputs are.
    pub fn zip_with<U: Copy + Default + Send + Sync, V: Copy + Default + Send + Sync>(
        &self,
        other: &Field<U>,
        f: impl Fn(T, U) -> V + Sync,
    ) -> Result<Field<V>, DomainError> {
        if !self.same_grid(other) {
            return Err(DomainError::GridMismatch);
        }
        let valid: Vec<bool> = self.valid.iter().zip(&other.valid).map(|(a, b)| *a && *b).collect();
        let values = (0..self.values.len())
            .into_par_iter()
            .map(|i| if valid[i] { f(self.values[i], other.values[i]) } else { V::default() })
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            values,
            valid,
        })
    }

    /// Node-wise map with access to the node index.
    pub fn map_indexed<U: Copy + Default + Send + Sync>(&self, f: impl Fn(usize, T) -> U + Sync) -> Field<U> {
        let values = (0..self.values.len())
            .into_par_iter()
            .map(|i| if self.valid[i] { f(i, self.values[i]) } else { U::default() })
            .collect();
        Field {
            grid: self.grid.clone(),
            values,
            valid: self.valid.clone(),
        }
    }

    /// Restricts validity to a subset.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        let valid = (0..self.values.len()).map(|i| self.valid[i] && keep(i)).collect();
        Field {
            grid: self.grid.clone(),
            values: self.values.clone(),
            valid,
        }
    }
}

impl ComplexField {
    pub fn re(&self) -> RealField {
        self.map(|v| v.re)
    }

    pub fn norm(&self) -> RealField {
        self.map(|v| v.norm())
    }

    /// Real part, rejecting samples with a non-negligible imaginary part.
    pub fn to_real(&self, tol: f64) -> Result<RealField, DomainError> {
        for (i, v) in self.values.iter().enumerate() {
            if self.valid[i] && v.im.abs() > tol * (1.0 + v.re.abs()) {
                return Err(DomainError::NotReal { node: i, im: v.im });
            }
        }
        Ok(self.re())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, ok)| **ok)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn derivative(&self, dir: Direction) -> ComplexField {
        let dx = self.partial(0);
        let dy = self.partial(1);
        let combine = |a: Complex64, b: Complex64| match dir {
            Direction::Dx => a,
            Direction::Dy => b,
            Direction::Dz => 0.5 * (a - Complex64::i() * b),
            Direction::Dzbar => 0.5 * (a + Complex64::i() * b),
        };
        dx.zip_with(&dy, combine).expect("same grid")
    }

    /// Central difference along grid axis `axis` (0 = first index), then
    /// converted to `∂x` / `∂y` for skewed torus charts.
    fn partial(&self, axis: usize) -> ComplexField {
        let g = &self.grid;
        let central = |dir: usize| -> (Vec<Complex64>, Vec<bool>) {
            let (di, dj) = if dir == 0 { (1, 0) } else { (0, 1) };
            (0..g.len())
                .into_par_iter()
                .map(|idx| {
                    match (g.neighbor(idx, di, dj), g.neighbor(idx, -di, -dj)) {
                        (Some(p), Some(m)) if self.valid[idx] && self.valid[p] && self.valid[m] => {
                            ((self.values[p] - self.values[m]) / (2.0 * g.spacing), true)
                        }
                        _ => (Complex64::new(0.0, 0.0), false),
                    }
                })
                .unzip()
        };
        let valid_both = |a: &[bool], b: &[bool]| a.iter().zip(b).map(|(x, y)| *x && *y).collect::<Vec<_>>();
        match (g.kind, axis) {
            (ChartKind::Torus { modulus_re, modulus_im }, 1) => {
                let (da, va) = central(0);
                let (db, vb) = central(1);
                let values = da
                    .iter()
                    .zip(&db)
                    .map(|(a, b)| (b - a * modulus_re) / modulus_im)
                    .collect();
                Field {
                    grid: g.clone(),
                    values,
                    valid: valid_both(&va, &vb),
                }
            }
            _ => {
                let (v, ok) = central(axis);
                Field {
                    grid: g.clone(),
                    values: v,
                    valid: ok,
                }
            }
        }
    }
}

impl RealField {
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, ok)| **ok)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn min_valid(&self) -> Option<f64> {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, ok)| **ok)
            .map(|(v, _)| *v)
            .reduce(f64::min)
    }

    pub fn to_complex(&self) -> ComplexField {
        self.map(|v| Complex64::new(v, 0.0))
    }
}

/// Weighted sum over all nodes carrying quadrature weight.
///
/// Fails if a weighted node has no valid sample. The sum runs in node
/// order, so results do not depend on the thread count.
pub fn integrate(f: &RealField) -> Result<f64, DomainError> {
    let g = f.grid();
    let mut total = 0.0;
    for (i, &w) in g.weights().iter().enumerate() {
        if w > 0.0 {
            if !f.is_valid(i) {
                return Err(DomainError::ShapeMismatch {
                    expected: g.len(),
                    got: f.valid_count(),
                });
            }
            total += w * f.value(i);
        }
    }
    Ok(total)
}

/// Weighted sum over valid weighted nodes, rescaled by the ratio of the
/// full weight to the covered weight.
pub fn integrate_masked(f: &RealField) -> f64 {
    let g = f.grid();
    let (mut total, mut covered) = (0.0, 0.0);
    for (i, &w) in g.weights().iter().enumerate() {
        if w > 0.0 && f.is_valid(i) {
            total += w * f.value(i);
            covered += w;
        }
    }
    if covered == 0.0 {
        0.0
    } else {
        total * g.total_weight() / covered
    }
}

/// Quadrature value at two resolutions with a Richardson-style error
/// estimate `|fine − coarse| / (2^order − 1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RefinedIntegral {
    pub coarse: f64,
    pub fine: f64,
    pub error_estimate: f64,
}

pub fn refine_integral(coarse: f64, fine: f64, order: f64) -> RefinedIntegral {
    RefinedIntegral {
        coarse,
        fine,
        error_estimate: (fine - coarse).abs() / (2f64.powf(order) - 1.0),
    }
}

/// Writes `x, y, <names...>` for every node valid in all fields.
pub fn write_csv<W: Write>(out: &mut W, columns: &[(&str, &RealField)]) -> io::Result<usize> {
    let Some((_, first)) = columns.first() else {
        return Ok(0);
    };
    let grid = first.grid().clone();
    write!(out, "x,y")?;
    for (name, _) in columns {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    let mut rows = 0;
    for idx in 0..grid.len() {
        if !columns.iter().all(|(_, f)| f.is_valid(idx)) {
            continue;
        }
        let z = grid.node(idx);
        write!(out, "{:.17e},{:.17e}", z.re, z.im)?;
        for (_, f) in columns {
            write!(out, ",{:.17e}", f.value(idx))?;
        }
        writeln!(out)?;
        rows += 1;
    }
    Ok(rows)
}

/// Writes `x, y, re, im` for every valid node.
pub fn write_complex_csv<W: Write>(out: &mut W, f: &ComplexField) -> io::Result<usize> {
    let re = f.map(|v| v.re);
    let im = f.map(|v| v.im);
    write_csv(out, &[("re", &re), ("im", &im)])
}
