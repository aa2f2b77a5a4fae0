use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose by {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("odd power of g survived expansion in `{identity}` (exponent {exponent})")]
    OddGPower { identity: String, exponent: i32 },
    #[error("cannot specialize {symbol} to zero: a term carries a negative power of it")]
    NegativePowerOfZero { symbol: &'static str },
}

/// Syntax error with a byte offset into the source text.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero at z = {re} + {im}i")]
    DivisionByZero { re: f64, im: f64 },
    #[error("non-finite value at z = {re} + {im}i")]
    NonFinite { re: f64, im: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("node count {n} is below the minimum {min} for this chart")]
    TooFewNodes { n: usize, min: usize },
    #[error("degenerate torus modulus: imaginary part {0} must be positive")]
    DegenerateModulus(f64),
    #[error("disk radius {0} must lie in (0, 1)")]
    RadiusOutOfRange(f64),
    #[error("field has {got} samples but the grid has {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field is not real-valued at node {node} (imaginary part {im:e})")]
    NotReal { node: usize, im: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HiggsError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("metric component {which} is not strictly positive at node {node} (value {value:e})")]
    NonPositiveMetric { which: &'static str, node: usize, value: f64 },
    #[error("Euler number {0} is odd")]
    OddEuler(i64),
    #[error("Euler number {value} exceeds the bound 2g-2 = {bound} for this chart")]
    EulerOutOfRange { value: i64, bound: i64 },
    #[error("field {field} is not holomorphic: sup |d/dzbar| = {residual:e} exceeds {tol:e}")]
    NotHolomorphic { field: &'static str, residual: f64, tol: f64 },
    #[error("field {field} is not constant on the torus (spread {spread:e})")]
    NotConstantOnTorus { field: &'static str, spread: f64 },
    #[error("the Hitchin solver only runs on torus charts")]
    NotTorus,
    #[error("solvability obstruction for the {unknown} equation: {reason}")]
    Obstruction { unknown: &'static str, reason: String },
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("grid has too few interior nodes for the stencil")]
    StencilTooSmall,
    #[error("Euler numbers are only defined on closed charts (torus or octagon)")]
    NotClosed,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdsError {
    #[error(transparent)]
    Higgs(#[from] HiggsError),
    #[error("node {0} lies outside the derivative stencil's valid region")]
    InvalidNode(usize),
    #[error("volume requires a closed chart (torus or octagon)")]
    NotClosed,
    #[error("theta resolution {0} is below the minimum of 8")]
    TooFewAngles(usize),
}
