//! Schrödinger-representation Weyl operators `W(x,p)ψ(y) = e^{i⟨y − x/2, p⟩} ψ(y − x)`.

use num_complex::Complex;

use crate::error::{PsidoError, Result};
use crate::fourier::{fourier_shift, fourier_x, Sign};
use crate::grid::{inner, lp_norm, ravel, same_space, unravel, GridSpec, SampledFunction, SpaceTag};
use crate::quantize::OperatorKernel;
use crate::scalar::Real;

/// A phase-space point `ξ = (x, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T> {
    pub x: Vec<T>,
    pub p: Vec<T>,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(x: Vec<T>, p: Vec<T>) -> Result<Self> {
        if x.len() != p.len() || x.is_empty() {
            return Err(PsidoError::Shape(format!("x has {} entries, p has {}", x.len(), p.len())));
        }
        if x.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(PsidoError::Domain("phase point has non-finite entries".into()));
        }
        Ok(PhasePoint { x, p })
    }

    pub fn origin(dim: usize) -> Self {
        PhasePoint { x: vec![T::zero(); dim], p: vec![T::zero(); dim] }
    }

    /// The lattice point with centered labels `(a, b)`: `x = a·h`, `p = b·π/L`.
    pub fn from_labels(grid: &GridSpec<T>, a: &[i64], b: &[i64]) -> Self {
        let (h, hd) = (grid.spacing(), grid.dual().spacing());
        PhasePoint {
            x: a.iter().map(|&v| T::of(v as f64) * h).collect(),
            p: b.iter().map(|&v| T::of(v as f64) * hd).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn neg(&self) -> Self {
        PhasePoint { x: self.x.iter().map(|&v| -v).collect(), p: self.p.iter().map(|&v| -v).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        PhasePoint {
            x: self.x.iter().zip(&o.x).map(|(&a, &b)| a + b).collect(),
            p: self.p.iter().zip(&o.p).map(|(&a, &b)| a + b).collect(),
        }
    }

    /// `σ(ξ, η) = ⟨y, p⟩ − ⟨x, q⟩` for `ξ = (x,p)`, `η = (y,q)`.
    pub fn sigma(&self, o: &Self) -> T {
        let mut s = T::zero();
        for k in 0..self.dim() {
            s += o.x[k] * self.p[k] - self.x[k] * o.p[k];
        }
        s
    }

    /// Integer labels if `x` is a multiple of `h` and `p` of `π/L` on every axis.
    pub fn lattice_labels(&self, grid: &GridSpec<T>) -> Option<(Vec<i64>, Vec<i64>)> {
        let snap = |v: T, step: T| -> Option<i64> {
            let r = v / step;
            let k = r.round();
            ((r - k).abs() <= T::of(1e-9) * (T::one() + k.abs())).then(|| k.to_f64_lossy() as i64)
        };
        let h = grid.spacing();
        let hd = grid.dual().spacing();
        let a = self.x.iter().map(|&v| snap(v, h)).collect::<Option<Vec<_>>>()?;
        let b = self.p.iter().map(|&v| snap(v, hd)).collect::<Option<Vec<_>>>()?;
        Some((a, b))
    }
}

/// Circular shift `f(· − m·h)` by integer lattice steps.
pub(crate) fn roll<T: Real>(f: &SampledFunction<T>, m: &[i64]) -> SampledFunction<T> {
    let n = f.grid.samples_per_axis();
    let axes = f.axes();
    let mut out = f.clone();
    let mut src = vec![0usize; axes];
    for (idx, o) in out.values.iter_mut().enumerate() {
        let digits = unravel(idx, n, axes);
        for a in 0..axes {
            src[a] = (digits[a] as i64 - m[a]).rem_euclid(n as i64) as usize;
        }
        *o = f.values[ravel(&src, n)];
    }
    out
}

/// Translate `ψ(· − x)`: exact roll on the lattice, band-limited interpolation otherwise.
fn translate<T: Real>(psi: &SampledFunction<T>, x: &[T]) -> Result<SampledFunction<T>> {
    let probe = PhasePoint { x: x.to_vec(), p: vec![T::zero(); x.len()] };
    match probe.lattice_labels(&psi.grid) {
        Some((a, _)) => Ok(roll(psi, &a)),
        None => fourier_shift(psi, x),
    }
}

/// `W(ξ)ψ`.
pub fn weyl_apply<T: Real>(xi: &PhasePoint<T>, psi: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    psi.require("X")?;
    if xi.dim() != psi.grid.dim() {
        return Err(PsidoError::Shape(format!("phase point of dim {} on a grid of dim {}", xi.dim(), psi.grid.dim())));
    }
    let mut out = translate(psi, &xi.x)?;
    let half = T::of(0.5);
    for (idx, z) in out.values.iter_mut().enumerate() {
        let y = psi.grid.point(&SpaceTag::X, idx);
        let mut t = T::zero();
        for k in 0..xi.dim() {
            t += (y[k] - half * xi.x[k]) * xi.p[k];
        }
        *z = *z * Complex::new(t.cos(), t.sin());
    }
    Ok(out)
}

/// Kernel of `W(ξ)` on the grid, assembled column by column.
pub fn weyl_kernel<T: Real>(xi: &PhasePoint<T>, grid: GridSpec<T>) -> Result<OperatorKernel<T>> {
    let m = grid.len(&SpaceTag::X);
    let mut mat = vec![Complex::new(T::zero(), T::zero()); m * m];
    let mut e = SampledFunction::zeros(SpaceTag::X, grid);
    for j in 0..m {
        e.values.iter_mut().for_each(|z| *z = Complex::new(T::zero(), T::zero()));
        e.values[j] = Complex::new(T::one(), T::zero());
        let col = weyl_apply(xi, &e)?;
        for i in 0..m {
            mat[i * m + j] = col.values[i];
        }
    }
    Ok(OperatorKernel::from_matrix(grid, mat))
}

/// `‖W(ξ)W(η)ψ − e^{(i/2)σ(ξ,η)} W(ξ+η)ψ‖ / ‖ψ‖`.
pub fn composition_defect<T: Real>(xi: &PhasePoint<T>, eta: &PhasePoint<T>, psi: &SampledFunction<T>) -> Result<T> {
    let norm = lp_norm(psi, T::of(2.0))?;
    if norm == T::zero() {
        return Err(PsidoError::Domain("test vector must be nonzero".into()));
    }
    let lhs = weyl_apply(xi, &weyl_apply(eta, psi)?)?;
    let s = xi.sigma(eta) * T::of(0.5);
    let rhs = weyl_apply(&xi.add(eta), psi)?.scale(Complex::new(s.cos(), s.sin()));
    Ok(lp_norm(&lhs.sub(&rhs)?, T::of(2.0))? / norm)
}

/// Window of the natural phase lattice used for truncated phase-space quadrature:
/// `N/2` points per axis on `[−L/2, L/2)`, i.e. position step `h`, frequency step `2π/L`.
pub fn parseval_window<T: Real>(grid: &GridSpec<T>) -> Result<GridSpec<T>> {
    GridSpec::new(grid.dim(), grid.samples_per_axis() / 2, grid.half_width() / T::of(2.0))
}

/// `w(ξ) = (φ, W(ξ)ψ)` sampled on the lattice of `phase_grid`.
pub fn matrix_coefficient<T: Real>(
    phi: &SampledFunction<T>,
    psi: &SampledFunction<T>,
    phase_grid: GridSpec<T>,
) -> Result<SampledFunction<T>> {
    phi.require("X")?;
    same_space(phi, psi)?;
    let d = psi.grid.dim();
    if phase_grid.dim() != d {
        return Err(PsidoError::Shape("phase grid dimension differs from the position grid".into()));
    }
    let tag = SpaceTag::phase(d);
    let nq = phase_grid.samples_per_axis();
    let nx = nq.pow(d as u32);
    let dual = psi.grid.dual();
    let mut out = SampledFunction::zeros(tag.clone(), phase_grid);
    let half = T::of(0.5);
    for ix in 0..nx {
        let x: Vec<T> = unravel(ix, nq, d).iter().map(|&j| phase_grid.coord(j)).collect();
        let shifted = translate(psi, &x)?;
        let g = phi.zip_with(&shifted, |a, b| a.conj() * b)?;
        let spectrum = fourier_x(&g, Sign::Conjugate)?;
        for ip in 0..nx {
            let p: Vec<T> = unravel(ip, nq, d).iter().map(|&j| phase_grid.dual().coord(j)).collect();
            let probe = PhasePoint { x: vec![T::zero(); d], p: p.clone() };
            let val = match probe.lattice_labels(&psi.grid) {
                Some((_, b)) => {
                    let digits: Vec<usize> = b.iter().map(|&v| dual.wrap(v)).collect();
                    let t = -half * x.iter().zip(&p).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                    spectrum.values[ravel(&digits, dual.samples_per_axis())] * Complex::new(t.cos(), t.sin())
                }
                None => inner(phi, &weyl_apply(&PhasePoint { x: x.clone(), p }, psi)?)?,
            };
            out.values[ix * nx + ip] = val;
        }
    }
    Ok(out)
}

/// Relative defect of `Σ_ξ w |(φ, W(ξ)ψ)|² = ‖φ‖²‖ψ‖²` over `phase_grid`.
pub fn parseval_defect<T: Real>(
    phi: &SampledFunction<T>,
    psi: &SampledFunction<T>,
    phase_grid: GridSpec<T>,
) -> Result<T> {
    let two = T::of(2.0);
    let target = lp_norm(phi, two)?.powi(2) * lp_norm(psi, two)?.powi(2);
    if target == T::zero() {
        return Err(PsidoError::Domain("phi and psi must be nonzero".into()));
    }
    let w = matrix_coefficient(phi, psi, phase_grid)?;
    Ok((lp_norm(&w, two)?.powi(2) - target).abs() / target)
}
