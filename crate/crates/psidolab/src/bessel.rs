//! Bessel potential kernels and separable trace-class symbols.
//!
//! `ψ_s` on `X` is the inverse transform of `⟨p⟩^{−s}`; `χ_s` on `X*` is the
//! conjugate transform of `⟨x⟩^{−s}`. Both are computed spectrally on the
//! lattice, so their transforms equal the Bessel multipliers exactly and
//! the singularity at the origin is resolved only up to grid scale.

use num_complex::Complex;

use crate::error::{PsidoError, Result};
use crate::fourier::{fourier_x, fourier_xstar, Sign};
use crate::grid::{sample_real, GridSpec, SampledFunction, SpaceTag};
use crate::quantize::{kernel_from_symbol, QuantizationParams};
use crate::scalar::{japanese, Real};
use crate::schatten::schatten_norm;

/// Which lattice a Bessel kernel is sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    X,
    Xstar,
}

/// Block-wise product `Π_j ⟨ζ_j⟩^{−s_j}` over a decomposition of the coordinates.
fn block_bracket<T: Real>(z: &[T], s: &[T], blocks: &[usize]) -> T {
    let mut start = 0;
    let mut out = T::one();
    for (j, &b) in blocks.iter().enumerate() {
        out *= japanese(&z[start..start + b]).powf(-s[j]);
        start += b;
    }
    out
}

fn check_orders<T: Real>(s: &[T], blocks: &[usize], dim: usize) -> Result<()> {
    if s.len() != blocks.len() {
        return Err(PsidoError::Shape(format!("{} orders for {} blocks", s.len(), blocks.len())));
    }
    SpaceTag::phase_blocks(blocks.to_vec(), dim)?;
    if let Some(bad) = s.iter().find(|&&v| !(v > T::zero())) {
        return Err(PsidoError::Domain(format!("Bessel order must be positive, got {bad}")));
    }
    Ok(())
}

/// `ψ_s` (on `X`) or `χ_s` (on `X*`) for the position grid `grid`.
pub fn bessel_kernel<T: Real>(s: T, grid: GridSpec<T>, which: Lattice) -> Result<SampledFunction<T>> {
    bessel_kernel_blocks(&[s], grid, &[grid.dim()], which)
}

/// Tensor product `ψ_{s₁} ⊗ … ⊗ ψ_{s_k}` over the blocks of a decomposition.
pub fn bessel_kernel_blocks<T: Real>(
    s: &[T],
    grid: GridSpec<T>,
    blocks: &[usize],
    which: Lattice,
) -> Result<SampledFunction<T>> {
    check_orders(s, blocks, grid.dim())?;
    let real = |f: SampledFunction<T>| f.map(|z| Complex::new(z.re, T::zero()));
    match which {
        Lattice::X => {
            let m = sample_real(|p| block_bracket(p, s, blocks), grid.dual(), SpaceTag::Xstar)?;
            Ok(real(fourier_xstar(&m, Sign::Conjugate)?))
        }
        Lattice::Xstar => {
            let m = sample_real(|x| block_bracket(x, s, blocks), grid, SpaceTag::X)?;
            Ok(real(fourier_x(&m, Sign::Conjugate)?))
        }
    }
}

/// `g(x, p) = Π_j ψ_{t_j}(x_j) χ_{s_j}(p_j)` on phase space.
pub fn cordes_symbol<T: Real>(t: &[T], s: &[T], grid: GridSpec<T>, blocks: &[usize]) -> Result<SampledFunction<T>> {
    let psi = bessel_kernel_blocks(t, grid, blocks, Lattice::X)?;
    let chi = bessel_kernel_blocks(s, grid, blocks, Lattice::Xstar)?;
    let m = psi.values.len();
    let mut values = Vec::with_capacity(m * m);
    for a in &psi.values {
        for b in &chi.values {
            values.push(Complex::new(a.re * b.re, T::zero()));
        }
    }
    SampledFunction::from_values(SpaceTag::Phase { blocks: blocks.to_vec() }, grid, values)
}

/// Smallest admissible Bessel orders of a separable symbol for trace-class quantization:
/// `n_j/2` per block at `τ = 0`, `n_j` otherwise (strict inequality required).
pub fn cordes_threshold<T: Real>(block_dim: usize, tau: T) -> T {
    let n = T::of_usize(block_dim);
    if tau == T::zero() {
        n / T::of(2.0)
    } else {
        n
    }
}

/// Whether every order in `t` and `s` strictly exceeds its block threshold.
pub fn cordes_admissible<T: Real>(t: &[T], s: &[T], blocks: &[usize], tau: T) -> bool {
    blocks
        .iter()
        .enumerate()
        .all(|(j, &b)| t.get(j).zip(s.get(j)).is_some_and(|(&tj, &sj)| tj > cordes_threshold(b, tau) && sj > cordes_threshold(b, tau)))
}

/// Schatten-1 norm of `Op_τ(g)` on each refinement grid.
pub fn trace_class_probe<T: Real>(
    g: impl Fn(GridSpec<T>) -> Result<SampledFunction<T>>,
    tau: T,
    refinements: &[GridSpec<T>],
) -> Result<Vec<T>> {
    refinements
        .iter()
        .map(|&grid| {
            let sym = g(grid)?;
            let k = kernel_from_symbol(&sym, &QuantizationParams::new(tau, grid))?;
            schatten_norm(&k, T::one())
        })
        .collect()
}
