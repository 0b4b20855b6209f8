//! Symbol ↔ kernel maps of the `τ`-quantization.
//!
//! The kernel of `Op_τ(a)` is
//! `K(x, y) = Σ_p (2L)^{−n} e^{i⟨x − y, p⟩} a((1 − τ)x + τy, p)`.
//! Writing `k(u, z)` for the inverse transform of `a(u, ·)`, the entry at
//! `(x, x − z)` is `k(x − τz, z)` where `z` is the centered representative of
//! the index difference. The `u`-argument is reached by a band-limited
//! translate of each `z`-column, which is unitary, so the map is exactly
//! invertible for every `τ`.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{PsidoError, Result};
use crate::fourier::{axis_dft, fourier_shift, phase_multiplier, Sign};
use crate::grid::{ravel, unravel, GridSpec, SampledFunction, SpaceTag};
use crate::scalar::Real;
use crate::weyl::roll;

/// Quantization context: scalar `τ`, position grid, block decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationParams<T> {
    pub tau: T,
    pub grid: GridSpec<T>,
    pub blocks: Vec<usize>,
}

impl<T: Real> QuantizationParams<T> {
    pub fn new(tau: T, grid: GridSpec<T>) -> Self {
        QuantizationParams { tau, grid, blocks: vec![grid.dim()] }
    }

    /// Kohn–Nirenberg quantization.
    pub fn standard(grid: GridSpec<T>) -> Self {
        Self::new(T::zero(), grid)
    }

    pub fn weyl(grid: GridSpec<T>) -> Self {
        Self::new(T::of(0.5), grid)
    }

    pub fn with_blocks(mut self, blocks: Vec<usize>) -> Result<Self> {
        SpaceTag::phase_blocks(blocks.clone(), self.grid.dim())?;
        self.blocks = blocks;
        Ok(self)
    }
}

/// Dense kernel `K(x_i, y_j)`; the operator acts as `(Aφ)(x_i) = Σ_j hⁿ K_ij φ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorKernel<T> {
    pub grid: GridSpec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> OperatorKernel<T> {
    pub fn dim(&self) -> usize {
        self.grid.len(&SpaceTag::X)
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        let m = grid.len(&SpaceTag::X);
        OperatorKernel { grid, values: vec![Complex::new(T::zero(), T::zero()); m * m] }
    }

    pub fn identity(grid: GridSpec<T>) -> Self {
        let mut k = Self::zeros(grid);
        let m = k.dim();
        let d = T::one() / grid.weight(&SpaceTag::X);
        for i in 0..m {
            k.values[i * m + i] = Complex::new(d, T::zero());
        }
        k
    }

    /// Kernel whose weighted matrix `hⁿK` equals `mat` (row-major).
    pub fn from_matrix(grid: GridSpec<T>, mat: Vec<Complex<T>>) -> Self {
        let w = grid.weight(&SpaceTag::X);
        OperatorKernel { grid, values: mat.into_iter().map(|z| z / w).collect() }
    }

    /// The weighted matrix `hⁿK` representing the operator on weighted `ℓ²`.
    pub fn matrix(&self) -> Vec<Complex<T>> {
        let w = self.grid.weight(&SpaceTag::X);
        self.values.iter().map(|&z| z * w).collect()
    }

    /// Rank-one kernel `|φ)(ψ|`, i.e. `K(x, y) = φ(x) conj(ψ(y))`.
    pub fn rank_one(phi: &SampledFunction<T>, psi: &SampledFunction<T>) -> Result<Self> {
        phi.require("X")?;
        crate::grid::same_space(phi, psi)?;
        let m = phi.values.len();
        let mut values = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                values.push(phi.values[i] * psi.values[j].conj());
            }
        }
        Ok(OperatorKernel { grid: phi.grid, values })
    }

    pub fn apply(&self, f: &SampledFunction<T>) -> Result<SampledFunction<T>> {
        f.require("X")?;
        if f.grid != self.grid {
            return Err(PsidoError::Shape("vector and kernel live on different grids".into()));
        }
        let m = self.dim();
        let w = self.grid.weight(&SpaceTag::X);
        let mut out = f.clone();
        for i in 0..m {
            let row = &self.values[i * m..(i + 1) * m];
            let acc = row.iter().zip(&f.values).fold(Complex::new(T::zero(), T::zero()), |acc, (k, v)| acc + k * v);
            out.values[i] = acc * w;
        }
        Ok(out)
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.grid != o.grid {
            return Err(PsidoError::Shape("kernels live on different grids".into()));
        }
        Ok(())
    }

    /// Kernel of the product `A·B`: `Σ_z hⁿ K_A(x, z) K_B(z, y)`.
    pub fn compose(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let m = self.dim();
        let w = self.grid.weight(&SpaceTag::X);
        let mut values = vec![Complex::new(T::zero(), T::zero()); m * m];
        for i in 0..m {
            for k in 0..m {
                let a = self.values[i * m + k] * w;
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &o.values[k * m..(k + 1) * m];
                for (dst, b) in values[i * m..(i + 1) * m].iter_mut().zip(row) {
                    *dst += a * b;
                }
            }
        }
        Ok(OperatorKernel { grid: self.grid, values })
    }

    pub fn adjoint(&self) -> Self {
        let m = self.dim();
        let mut values = self.values.clone();
        for i in 0..m {
            for j in 0..m {
                values[i * m + j] = self.values[j * m + i].conj();
            }
        }
        OperatorKernel { grid: self.grid, values }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(OperatorKernel { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(OperatorKernel { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        OperatorKernel { grid: self.grid, values: self.values.iter().map(|z| z * c).collect() }
    }

    pub fn max_abs_diff(&self, o: &Self) -> Result<T> {
        self.check(o)?;
        Ok(self.values.iter().zip(&o.values).fold(T::zero(), |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `hⁿ Σ K(x_i, x_i)`.
    pub fn trace(&self) -> Complex<T> {
        let m = self.dim();
        let s = (0..m).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.values[i * m + i]);
        s * self.grid.weight(&SpaceTag::X)
    }

    /// Hilbert–Schmidt norm `hⁿ‖K‖_F`.
    pub fn hilbert_schmidt(&self) -> T {
        let terms: Vec<T> = self.values.iter().map(|z| z.norm_sqr()).collect();
        crate::scalar::pairwise_sum(&terms, T::zero()).sqrt() * self.grid.weight(&SpaceTag::X)
    }
}

fn check_symbol<T: Real>(a: &SampledFunction<T>, params: &QuantizationParams<T>) -> Result<()> {
    a.require("Phase")?;
    if a.grid != params.grid {
        return Err(PsidoError::Shape(format!("symbol grid {:?} differs from quantization grid {:?}", a.grid, params.grid)));
    }
    if !params.tau.is_finite() {
        return Err(PsidoError::Domain("tau must be finite".into()));
    }
    Ok(())
}

/// Shifts `column` (a function of `u` on the X lattice) to `u ↦ column(u − s)` with `s = shift·labels·h`.
fn shift_column<T: Real>(column: SampledFunction<T>, labels: &[i64], shift: T) -> Result<SampledFunction<T>> {
    if shift == T::zero() {
        return Ok(column);
    }
    let h = column.grid.spacing();
    let steps: Vec<T> = labels.iter().map(|&c| shift * T::of(c as f64)).collect();
    if steps.iter().all(|s| s.fract() == T::zero()) {
        let m: Vec<i64> = steps.iter().map(|s| s.to_f64_lossy() as i64).collect();
        return Ok(roll(&column, &m));
    }
    let s: Vec<T> = steps.iter().map(|&v| v * h).collect();
    fourier_shift(&column, &s)
}

/// Kernel of `Op_τ(a)`.
pub fn kernel_from_symbol<T: Real>(a: &SampledFunction<T>, params: &QuantizationParams<T>) -> Result<OperatorKernel<T>> {
    check_symbol(a, params)?;
    let g = params.grid;
    let (n, d) = (g.samples_per_axis(), g.dim());
    let m = n.pow(d as u32);
    let mut k = a.values.clone();
    let mut planner = FftPlanner::new();
    let wp = g.dual().spacing() / (T::of(2.0) * T::PI());
    for ax in d..2 * d {
        axis_dft(&mut k, n, 2 * d, ax, Sign::Conjugate, wp, &mut planner);
    }
    let mut out = OperatorKernel::zeros(g);
    for zi in 0..m {
        let zdig = unravel(zi, n, d);
        let labels: Vec<i64> = zdig.iter().map(|&j| g.centered(j)).collect();
        let col: Vec<Complex<T>> = (0..m).map(|u| k[u * m + zi]).collect();
        let col = SampledFunction { tag: SpaceTag::X, grid: g, values: col };
        let col = shift_column(col, &labels, params.tau)?;
        for (i, v) in col.values.iter().enumerate() {
            let xdig = unravel(i, n, d);
            let ydig: Vec<usize> = xdig.iter().zip(&labels).map(|(&x, &c)| (x as i64 - c).rem_euclid(n as i64) as usize).collect();
            out.values[i * m + ravel(&ydig, n)] = *v;
        }
    }
    Ok(out)
}

/// Alias for [`kernel_from_symbol`].
pub fn quantize<T: Real>(a: &SampledFunction<T>, params: &QuantizationParams<T>) -> Result<OperatorKernel<T>> {
    kernel_from_symbol(a, params)
}

/// `τ`-symbol of the operator with kernel `K`; exact inverse of [`kernel_from_symbol`].
pub fn symbol_from_kernel<T: Real>(kernel: &OperatorKernel<T>, params: &QuantizationParams<T>) -> Result<SampledFunction<T>> {
    if kernel.grid != params.grid {
        return Err(PsidoError::Shape("kernel grid differs from quantization grid".into()));
    }
    let g = params.grid;
    let (n, d) = (g.samples_per_axis(), g.dim());
    let m = n.pow(d as u32);
    let mut k = vec![Complex::new(T::zero(), T::zero()); m * m];
    for zi in 0..m {
        let labels: Vec<i64> = unravel(zi, n, d).iter().map(|&j| g.centered(j)).collect();
        let col: Vec<Complex<T>> = (0..m)
            .map(|i| {
                let xdig = unravel(i, n, d);
                let ydig: Vec<usize> =
                    xdig.iter().zip(&labels).map(|(&x, &c)| (x as i64 - c).rem_euclid(n as i64) as usize).collect();
                kernel.values[i * m + ravel(&ydig, n)]
            })
            .collect();
        let col = SampledFunction { tag: SpaceTag::X, grid: g, values: col };
        let col = shift_column(col, &labels, -params.tau)?;
        for (u, v) in col.values.into_iter().enumerate() {
            k[u * m + zi] = v;
        }
    }
    let mut planner = FftPlanner::new();
    for ax in d..2 * d {
        axis_dft(&mut k, n, 2 * d, ax, Sign::Forward, g.spacing(), &mut planner);
    }
    Ok(SampledFunction { tag: SpaceTag::Phase { blocks: params.blocks.clone() }, grid: g, values: k })
}

/// Converts a `τ_from`-symbol into the `τ_to`-symbol of the same operator.
pub fn convert_tau<T: Real>(a: &SampledFunction<T>, tau_from: T, tau_to: T) -> Result<SampledFunction<T>> {
    if !tau_from.is_finite() || !tau_to.is_finite() {
        return Err(PsidoError::Domain("tau must be finite".into()));
    }
    if tau_from == tau_to {
        return Ok(a.clone());
    }
    let n = a.grid.dim();
    let c = tau_to - tau_from;
    phase_multiplier(a, |z| {
        let t = c * (0..n).fold(T::zero(), |acc, k| acc + z[k] * z[n + k]);
        Complex::new(t.cos(), t.sin())
    })
}

/// `σ^τ(Op_τ(a) Op_τ(b))` through the kernel product.
pub fn compose_symbols<T: Real>(
    a: &SampledFunction<T>,
    b: &SampledFunction<T>,
    params: &QuantizationParams<T>,
) -> Result<SampledFunction<T>> {
    let ka = kernel_from_symbol(a, params)?;
    let kb = kernel_from_symbol(b, params)?;
    symbol_from_kernel(&ka.compose(&kb)?, params)
}
