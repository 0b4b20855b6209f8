//! Discrete phase-space analysis on periodic lattices: Weyl systems,
//! τ-quantization, Schatten norms, Kato averaging, Bessel potentials and
//! Fourier multipliers.
//!
//! Every numeric routine is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the scalar to `f64`, with `F32` variants alongside.

pub mod bessel;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod kato;
pub mod multiplier;
pub mod quantize;
pub mod scalar;
pub mod schatten;
pub mod symclass;
pub mod weyl;

pub use error::{PsidoError, Result};
pub use grid::SpaceTag;
pub use scalar::Real;

pub type Grid = grid::GridSpec<f64>;
pub type Sampled = grid::SampledFunction<f64>;
pub type Kernel = quantize::OperatorKernel<f64>;
pub type Point = weyl::PhasePoint<f64>;

pub type GridF32 = grid::GridSpec<f32>;
pub type SampledF32 = grid::SampledFunction<f32>;
pub type KernelF32 = quantize::OperatorKernel<f32>;
pub type PointF32 = weyl::PhasePoint<f32>;
