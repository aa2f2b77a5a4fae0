//! Higgs-bundle construction of closed anti-de Sitter 3-manifolds.
//!
//! Two representations of a surface group into `SL(2,R)` are described by
//! Higgs-bundle data `(α, β, γ, δ)` and diagonal harmonic metrics `(h, k)`.
//! This crate assembles the flat connection of their tensor product,
//! evaluates pull-back metrics and Euler numbers, builds the tautological
//! section over the unit circle bundle and its Lorentzian metric, integrates
//! the volume, and studies the Gauss map into the Klein quadric.
//!
//! The algebra that the numerics rely on is certified exactly in
//! [`symbolic`].

pub mod ads;
pub mod algebra;
pub mod domains;
pub mod error;
pub mod grassmann;
pub mod higgs;
pub mod symbolic;

pub use num_complex::Complex64;
