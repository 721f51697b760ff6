//! Gabor-frame representations of constant-coefficient evolution operators.
//!
//! The library builds sampled time-frequency analysis (STFT, Wigner, Gabor
//! frames), constructs propagator symbols for operators
//! `d_t^m + sum_k a_k(D) d_t^{m-k}`, assembles their Gabor matrices by
//! independent routes, quantifies the super-exponential off-diagonal decay
//! and sparsity of those matrices, and exploits the sparsity in a Cauchy
//! solver benchmarked against a dense spectral reference.
//!
//! The numeric core is generic over the scalar type (`f32` or `f64`) through
//! the [`Real`] trait; the `f64` instantiations below are the ones exercised
//! by the CLI and the test suite.

pub mod analysis;
pub mod error;
pub mod fft;
pub mod fitting;
pub mod frame;
pub mod gabor_matrix;
pub mod grid;
pub mod lattice;
pub mod operator;
pub mod poly;
pub mod propagate;
pub mod real;
pub mod roots;
pub mod symbols;
pub mod tf;
pub mod window;

mod linalg;

pub use error::{GaborError, Result};
pub use grid::{Grid, PhasePoint, SampledField};
pub use real::Real;
pub use window::WindowSpec;

/// Concrete `f64` instantiations used by the CLI and most callers.
pub type Grid64 = Grid<f64>;
pub type Field64 = SampledField<f64>;
pub type PhasePoint64 = PhasePoint<f64>;
pub type Window64 = WindowSpec<f64>;
