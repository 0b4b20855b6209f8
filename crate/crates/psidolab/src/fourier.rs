//! Discrete Fourier transforms between the lattices of `X`, `X*` and phase space.
//!
//! All transforms are centered: lattice index `N/2` is the origin both before
//! and after the transform. With `x_j = (j − N/2)h` and `p_k = (k − N/2)π/L`
//! one has `x_j p_k = Nπ/2 − (j + k)π + 2πjk/N`, so every transform is an FFT
//! sandwiched between `(−1)^j` and `(−1)^{k + N/2}` ramps.

use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{PsidoError, Result};
use crate::grid::{ravel, same_space, unravel, SampledFunction, SpaceTag};
use crate::scalar::Real;

/// Sign of the exponent in a Fourier kernel `e^{∓i⟨x,p⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// `e^{−i⟨x,p⟩}`
    Forward,
    /// `e^{+i⟨x,p⟩}`
    Conjugate,
}

/// Largest number of phase points squared accepted by [`twisted_convolution`].
pub const TWISTED_BUDGET: usize = 1 << 28;

/// In-place centered DFT along one axis of an `n^axes` row-major array.
pub(crate) fn axis_dft<T: Real>(
    data: &mut [Complex<T>],
    n: usize,
    axes: usize,
    axis: usize,
    sign: Sign,
    weight: T,
    planner: &mut FftPlanner<T>,
) {
    let dir = match sign {
        Sign::Forward => FftDirection::Forward,
        Sign::Conjugate => FftDirection::Inverse,
    };
    let fft = planner.plan_fft(n, dir);
    let stride = n.pow((axes - 1 - axis) as u32);
    let outer = data.len() / (n * stride);
    let half_parity = (n / 2) % 2;
    let mut line = vec![Complex::new(T::zero(), T::zero()); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (j, z) in line.iter_mut().enumerate() {
                let v = data[base + j * stride];
                *z = if j % 2 == 1 { -v } else { v };
            }
            fft.process(&mut line);
            for (k, z) in line.iter().enumerate() {
                let v = *z * weight;
                data[base + k * stride] = if (k + half_parity) % 2 == 1 { -v } else { v };
            }
        }
    }
}

/// Per-axis quadrature weight of a function's lattice (spacing, with `1/2π` on frequency axes).
fn axis_weights<T: Real>(f: &SampledFunction<T>) -> Vec<T> {
    let two_pi = T::of(2.0) * T::PI();
    let n = f.grid.dim();
    (0..f.axes())
        .map(|a| match &f.tag {
            SpaceTag::X => f.grid.spacing(),
            SpaceTag::Xstar => f.grid.spacing() / two_pi,
            SpaceTag::Phase { .. } if a < n => f.grid.spacing(),
            SpaceTag::Phase { .. } => f.grid.dual().spacing() / two_pi,
        })
        .collect()
}

/// Frequency coordinates conjugate to each axis of `f`, as functions of the transform index.
pub(crate) fn axis_freq_spacing<T: Real>(f: &SampledFunction<T>) -> Vec<T> {
    let n = f.grid.dim();
    (0..f.axes())
        .map(|a| match &f.tag {
            SpaceTag::X => f.grid.dual().spacing(),
            SpaceTag::Xstar => f.grid.dual().spacing(),
            SpaceTag::Phase { .. } if a < n => f.grid.dual().spacing(),
            SpaceTag::Phase { .. } => f.grid.spacing(),
        })
        .collect()
}

/// `F_X u(p) = Σ hⁿ e^{∓i⟨x,p⟩} u(x)`, landing on the dual lattice.
pub fn fourier_x<T: Real>(u: &SampledFunction<T>, sign: Sign) -> Result<SampledFunction<T>> {
    u.require("X")?;
    let mut values = u.values.clone();
    let (n, d) = (u.grid.samples_per_axis(), u.grid.dim());
    let mut planner = FftPlanner::new();
    for a in 0..d {
        axis_dft(&mut values, n, d, a, sign, u.grid.spacing(), &mut planner);
    }
    Ok(SampledFunction { tag: SpaceTag::Xstar, grid: u.grid.dual(), values })
}

/// `F_{X*} v(x) = Σ (h*/2π)ⁿ e^{∓i⟨x,p⟩} v(p)`, landing on the position lattice.
pub fn fourier_xstar<T: Real>(v: &SampledFunction<T>, sign: Sign) -> Result<SampledFunction<T>> {
    v.require("Xstar")?;
    let mut values = v.values.clone();
    let (n, d) = (v.grid.samples_per_axis(), v.grid.dim());
    let w = v.grid.spacing() / (T::of(2.0) * T::PI());
    let mut planner = FftPlanner::new();
    for a in 0..d {
        axis_dft(&mut values, n, d, a, sign, w, &mut planner);
    }
    Ok(SampledFunction { tag: SpaceTag::X, grid: v.grid.dual(), values })
}

/// Inverse of [`fourier_x`] with the forward sign.
pub fn inv_fourier_x<T: Real>(v: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    fourier_xstar(v, Sign::Conjugate)
}

/// `F_𝔖 a(ξ) = Σ_η w e^{−iσ(ξ,η)} a(η)` with `σ((x,p),(y,q)) = ⟨y,p⟩ − ⟨x,q⟩`.
///
/// Computed as the forward transform in the position slot, the conjugate
/// transform in the frequency slot, and a swap of the two slots.
pub fn symplectic_fourier<T: Real>(a: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    a.require("Phase")?;
    let (n, d) = (a.grid.samples_per_axis(), a.grid.dim());
    let mut values = a.values.clone();
    let mut planner = FftPlanner::new();
    let wp = a.grid.dual().spacing() / (T::of(2.0) * T::PI());
    for ax in 0..d {
        axis_dft(&mut values, n, 2 * d, ax, Sign::Forward, a.grid.spacing(), &mut planner);
        axis_dft(&mut values, n, 2 * d, d + ax, Sign::Conjugate, wp, &mut planner);
    }
    let block = n.pow(d as u32);
    let mut out = vec![Complex::new(T::zero(), T::zero()); values.len()];
    for i in 0..block {
        for k in 0..block {
            out[k * block + i] = values[i * block + k];
        }
    }
    Ok(SampledFunction { values: out, ..a.clone() })
}

/// `f(P_𝔖) a = F_𝔖 (f · F_𝔖 a)`.
pub fn phase_multiplier<T: Real>(
    a: &SampledFunction<T>,
    f: impl Fn(&[T]) -> Complex<T>,
) -> Result<SampledFunction<T>> {
    let mut spec = symplectic_fourier(a)?;
    for (idx, z) in spec.values.iter_mut().enumerate() {
        let pt = a.grid.point(&a.tag, idx);
        let m = f(&pt);
        if !m.re.is_finite() || !m.im.is_finite() {
            return Err(PsidoError::NonFinite { index: idx, coords: pt.iter().map(|c| c.to_f64_lossy()).collect() });
        }
        *z = *z * m;
    }
    symplectic_fourier(&spec)
}

/// Plain (componentwise) transform of any sampled function, all axes, forward sign.
pub(crate) fn plain_forward<T: Real>(f: &SampledFunction<T>) -> Vec<Complex<T>> {
    let mut values = f.values.clone();
    let mut planner = FftPlanner::new();
    for (ax, w) in axis_weights(f).into_iter().enumerate() {
        axis_dft(&mut values, f.grid.samples_per_axis(), f.axes(), ax, Sign::Forward, w, &mut planner);
    }
    values
}

/// Inverse of [`plain_forward`], returning samples on the lattice of `like`.
pub(crate) fn plain_inverse<T: Real>(spec: Vec<Complex<T>>, like: &SampledFunction<T>) -> SampledFunction<T> {
    let mut values = spec;
    let n = like.grid.samples_per_axis();
    let mut planner = FftPlanner::new();
    for (ax, w) in axis_weights(like).into_iter().enumerate() {
        let wi = T::one() / (T::of_usize(n) * w);
        axis_dft(&mut values, n, like.axes(), ax, Sign::Conjugate, wi, &mut planner);
    }
    SampledFunction { values, ..like.clone() }
}

/// Applies a Fourier multiplier in the plain transform domain.
///
/// `m` receives the conjugate frequency of every axis and the transform
/// index digits (index 0 on an axis is its Nyquist frequency).
pub fn spectral_multiplier<T: Real>(
    f: &SampledFunction<T>,
    m: impl Fn(&[T], &[usize]) -> Complex<T>,
) -> SampledFunction<T> {
    let mut spec = plain_forward(f);
    let n = f.grid.samples_per_axis();
    let steps = axis_freq_spacing(f);
    let axes = f.axes();
    let mut kappa = vec![T::zero(); axes];
    for (idx, z) in spec.iter_mut().enumerate() {
        let digits = unravel(idx, n, axes);
        for a in 0..axes {
            kappa[a] = T::of(digits[a] as f64 - (n / 2) as f64) * steps[a];
        }
        *z = *z * m(&kappa, &digits);
    }
    plain_inverse(spec, f)
}

/// Band-limited translate `f(· − s)` along every axis (`s` has one entry per axis).
pub fn fourier_shift<T: Real>(f: &SampledFunction<T>, s: &[T]) -> Result<SampledFunction<T>> {
    if s.len() != f.axes() {
        return Err(PsidoError::Shape(format!("shift has {} entries, function has {} axes", s.len(), f.axes())));
    }
    Ok(spectral_multiplier(f, |kappa, _| {
        let phase = kappa.iter().zip(s).fold(T::zero(), |acc, (&k, &v)| acc - k * v);
        Complex::new(phase.cos(), phase.sin())
    }))
}

/// Periodic convolution `Σ_η w b(η) c(ξ − η)` computed in the transform domain.
pub fn convolve<T: Real>(b: &SampledFunction<T>, c: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    same_space(b, c)?;
    let fb = plain_forward(b);
    let fc = plain_forward(c);
    let prod = fb.iter().zip(&fc).map(|(x, y)| x * y).collect();
    Ok(plain_inverse(prod, b))
}

/// Direct twisted convolution `Σ_η w e^{(i/2)σ(ξ,η)} μ(ξ − η) ν(η)`.
///
/// `σ` is evaluated in integer lattice units before exponentiation. Indices
/// `ξ − η` wrap periodically, so the result agrees with the continuum product
/// only when the supports keep `ξ − η` inside the box.
pub fn twisted_convolution<T: Real>(
    mu: &SampledFunction<T>,
    nu: &SampledFunction<T>,
) -> Result<SampledFunction<T>> {
    mu.require("Phase")?;
    same_space(mu, nu)?;
    let (n, d) = (mu.grid.samples_per_axis(), mu.grid.dim());
    let m = mu.values.len();
    if m.saturating_mul(m) > TWISTED_BUDGET {
        let mut suggested = 4;
        while (suggested + 2usize).pow(4 * d as u32) <= TWISTED_BUDGET {
            suggested += 2;
        }
        return Err(PsidoError::Resource {
            message: format!("{m} phase points need {} products", m as u128 * m as u128),
            suggested_n: suggested,
        });
    }
    let two_n = 2 * n as i64;
    let table: Vec<Complex<T>> = (0..two_n)
        .map(|k| {
            let t = T::PI() * T::of(k as f64) / T::of_usize(n);
            Complex::new(t.cos(), t.sin())
        })
        .collect();
    let labels: Vec<Vec<i64>> =
        (0..m).map(|i| unravel(i, n, 2 * d).iter().map(|&j| mu.grid.centered(j)).collect()).collect();
    let w = mu.weight();
    let mut out = vec![Complex::new(T::zero(), T::zero()); m];
    let mut diff = vec![0usize; 2 * d];
    for (i, o) in out.iter_mut().enumerate() {
        let xi = &labels[i];
        let mut acc = Complex::new(T::zero(), T::zero());
        for (j, eta) in labels.iter().enumerate() {
            let nv = nu.values[j];
            if nv.re == T::zero() && nv.im == T::zero() {
                continue;
            }
            let mut sigma = 0i64;
            for a in 0..d {
                sigma += eta[a] * xi[d + a] - xi[a] * eta[d + a];
            }
            for a in 0..2 * d {
                diff[a] = mu.grid.wrap(xi[a] - eta[a]);
            }
            let mv = mu.values[ravel(&diff, n)];
            acc += table[sigma.rem_euclid(two_n) as usize] * mv * nv;
        }
        *o = acc * w;
    }
    Ok(SampledFunction { values: out, ..mu.clone() })
}
