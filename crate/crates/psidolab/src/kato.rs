//! Dominance, phase-space averaging of operators and the synthesis identity.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{PsidoError, Result};
use crate::fourier::{convolve, fourier_shift, TWISTED_BUDGET};
use crate::grid::{unravel, GridSpec, SampledFunction, SpaceTag};
use crate::quantize::{kernel_from_symbol, OperatorKernel, QuantizationParams};
use crate::scalar::Real;
use crate::schatten::operator_norm;
use crate::weyl::{roll, PhasePoint};

const PSD_TOL: f64 = 1e-10;

fn check_psd<T: Real>(k: &OperatorKernel<T>, name: &str) -> Result<()> {
    let m = k.matrix();
    let d = k.dim();
    let scale = m.iter().fold(T::one(), |acc, z| acc.max(z.norm()));
    let tol = T::of(PSD_TOL) * scale;
    for i in 0..d {
        for j in 0..d {
            if (m[i * d + j] - m[j * d + i].conj()).norm() > tol {
                return Err(PsidoError::Precondition(format!("{name} is not Hermitian")));
            }
        }
    }
    let low = T::hermitian_eigenvalues(&m, d).first().copied().unwrap_or(T::zero());
    if low < -tol {
        return Err(PsidoError::Precondition(format!("{name} has negative eigenvalue {low}")));
    }
    Ok(())
}

fn quad_form<T: Real>(m: &[Complex<T>], u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    let d = u.len();
    let mut s = Complex::new(T::zero(), T::zero());
    for i in 0..d {
        let row = m[i * d..(i + 1) * d].iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b);
        s += u[i].conj() * row;
    }
    s
}

/// Largest violation of `|(u,Tv)|² ≤ (u,Au)(v,Bv)` over seeded random unit vectors, clamped at zero.
pub fn dominance_defect<T: Real>(
    t: &OperatorKernel<T>,
    a: &OperatorKernel<T>,
    b: &OperatorKernel<T>,
    trials: usize,
    seed: u64,
) -> Result<T> {
    if t.grid != a.grid || t.grid != b.grid {
        return Err(PsidoError::Shape("operators live on different grids".into()));
    }
    check_psd(a, "A")?;
    check_psd(b, "B")?;
    let (mt, ma, mb) = (t.matrix(), a.matrix(), b.matrix());
    let d = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || {
        let mut v: Vec<Complex<T>> = (0..d)
            .map(|_| {
                let (re, im): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                Complex::new(T::of(re), T::of(im))
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        v.iter_mut().for_each(|z| *z = *z / norm);
        v
    };
    let mut worst = T::zero();
    for _ in 0..trials {
        let (u, v) = (unit(), unit());
        let lhs = quad_form(&mt, &u, &v).norm_sqr();
        let rhs = quad_form(&ma, &u, &u).re * quad_form(&mb, &v, &v).re;
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}

/// `(|T*|, |T|)` from a single singular value decomposition.
pub fn polar_parts<T: Real>(t: &OperatorKernel<T>) -> Result<(OperatorKernel<T>, OperatorKernel<T>)> {
    let d = t.dim();
    let svd = T::svd(&t.matrix(), d).ok_or_else(|| PsidoError::Numerical("SVD did not converge".into()))?;
    let zero = Complex::new(T::zero(), T::zero());
    let mut left = vec![zero; d * d];
    let mut right = vec![zero; d * d];
    for i in 0..d {
        for j in 0..d {
            let (mut l, mut r) = (zero, zero);
            for k in 0..d {
                let s = svd.sigma[k];
                l += svd.u[i * d + k] * svd.u[j * d + k].conj() * s;
                r += svd.v_adjoint[k * d + i].conj() * svd.v_adjoint[k * d + j] * s;
            }
            left[i * d + j] = l;
            right[i * d + j] = r;
        }
    }
    Ok((OperatorKernel::from_matrix(t.grid, left), OperatorKernel::from_matrix(t.grid, right)))
}

/// `(T_ξ a)(η) = a(η − ξ)`: a roll for lattice `ξ`, band-limited shift otherwise.
pub fn translate_symbol<T: Real>(a: &SampledFunction<T>, xi: &PhasePoint<T>) -> Result<SampledFunction<T>> {
    a.require("Phase")?;
    if xi.dim() != a.grid.dim() {
        return Err(PsidoError::Shape(format!("phase point of dim {} on a grid of dim {}", xi.dim(), a.grid.dim())));
    }
    match xi.lattice_labels(&a.grid) {
        Some((x, p)) => Ok(roll(a, &[x, p].concat())),
        None => fourier_shift(a, &[xi.x.clone(), xi.p.clone()].concat()),
    }
}

/// Quadrature nodes on every `stride_x`-th position and `stride_p`-th frequency
/// label of the natural phase lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KatoQuadrature {
    pub stride_x: usize,
    pub stride_p: usize,
}

impl KatoQuadrature {
    pub fn full() -> Self {
        KatoQuadrature { stride_x: 1, stride_p: 1 }
    }

    pub fn new(stride_x: usize, stride_p: usize) -> Self {
        KatoQuadrature { stride_x, stride_p }
    }

    fn validate(&self, n: usize) -> Result<()> {
        for s in [self.stride_x, self.stride_p] {
            if s == 0 || n % s != 0 {
                return Err(PsidoError::InvalidGrid(format!("stride {s} does not divide {n}")));
            }
        }
        Ok(())
    }

    /// Cell weight of one node on the phase lattice of `grid`.
    pub fn weight<T: Real>(&self, grid: &GridSpec<T>) -> T {
        let cell = T::of_usize(self.stride_x * self.stride_p).powi(grid.dim() as i32);
        grid.weight(&SpaceTag::phase(grid.dim())) * cell
    }

    /// Number of nodes on `grid`.
    pub fn nodes<T: Real>(&self, grid: &GridSpec<T>) -> usize {
        let n = grid.samples_per_axis();
        ((n / self.stride_x) * (n / self.stride_p)).pow(grid.dim() as u32)
    }
}

/// `b{G} = Σ_k b(ξ_k) W(ξ_k) G W(−ξ_k) w_k` over the lattice nodes of `quad`.
pub fn kato_average<T: Real>(b: &SampledFunction<T>, g: &OperatorKernel<T>, quad: KatoQuadrature) -> Result<OperatorKernel<T>> {
    b.require("Phase")?;
    if b.grid != g.grid {
        return Err(PsidoError::Shape("symbol and operator live on different grids".into()));
    }
    let grid = g.grid;
    let n = grid.samples_per_axis();
    quad.validate(n)?;
    let dim = grid.dim();
    let m = g.dim();
    let xs: Vec<usize> = (0..m).filter(|&i| unravel(i, n, dim).iter().all(|&d| d % quad.stride_x == 0)).collect();
    let ps: Vec<usize> = (0..m).filter(|&i| unravel(i, n, dim).iter().all(|&d| d % quad.stride_p == 0)).collect();
    let work = xs.len().saturating_mul(m * m + ps.len() * m);
    if work > TWISTED_BUDGET {
        let mut suggested = n;
        while suggested > 2 && ((suggested / quad.stride_x.max(1)).pow(dim as u32)).saturating_mul(suggested.pow(2 * dim as u32)) > TWISTED_BUDGET {
            suggested /= 2;
        }
        return Err(PsidoError::Resource { message: format!("{work} operations exceed the averaging budget"), suggested_n: suggested });
    }
    let labels: Vec<Vec<i64>> = (0..m).map(|i| unravel(i, n, dim).iter().map(|&d| grid.centered(d)).collect()).collect();
    let ni = n as i64;
    let two_pi_n = T::of(2.0) * T::PI() / T::of_usize(n);
    let roots: Vec<Complex<T>> = (0..n).map(|k| Complex::from_polar(T::one(), two_pi_n * T::of_usize(k))).collect();
    let w = quad.weight(&grid);
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; m * m];
    let mut profile = vec![zero; m];
    for &xi in &xs {
        // profile(d) = Σ_p b(x, p) e^{2πi⟨p, d⟩/N} over the frequency nodes, d a wrapped difference label
        for (di, slot) in profile.iter_mut().enumerate() {
            let d = &labels[di];
            *slot = ps.iter().fold(zero, |acc, &pi| {
                let k: i64 = labels[pi].iter().zip(d).map(|(a, b)| a * b).sum();
                acc + b.values[xi * m + pi] * roots[k.rem_euclid(ni) as usize]
            });
        }
        let shift = &labels[xi];
        for i in 0..m {
            let si = wrap_index(&labels[i], shift, n, grid);
            for j in 0..m {
                let sj = wrap_index(&labels[j], shift, n, grid);
                let diff: Vec<i64> = labels[i].iter().zip(&labels[j]).map(|(a, b)| a - b).collect();
                let di = crate::grid::ravel(&diff.iter().map(|&c| grid.wrap(c)).collect::<Vec<_>>(), n);
                out[i * m + j] += profile[di] * g.values[si * m + sj];
            }
        }
    }
    Ok(OperatorKernel { grid, values: out.into_iter().map(|z| z * w).collect() })
}

fn wrap_index<T: Real>(label: &[i64], shift: &[i64], n: usize, grid: GridSpec<T>) -> usize {
    let digits: Vec<usize> = label.iter().zip(shift).map(|(a, s)| grid.wrap(a - s)).collect();
    crate::grid::ravel(&digits, n)
}

/// `‖1{G} − Tr(G)·I‖ / |Tr G|` in operator norm.
pub fn unit_average_defect<T: Real>(g: &OperatorKernel<T>, quad: KatoQuadrature) -> Result<T> {
    let one = SampledFunction::from_values(
        SpaceTag::phase(g.grid.dim()),
        g.grid,
        vec![Complex::new(T::one(), T::zero()); g.grid.len(&SpaceTag::phase(g.grid.dim()))],
    )?;
    let avg = kato_average(&one, g, quad)?;
    let tr = g.trace();
    if tr.norm() == T::zero() {
        return Err(PsidoError::Domain("seed operator has zero trace".into()));
    }
    let want = OperatorKernel::identity(g.grid).scale(tr);
    Ok(operator_norm(&avg.sub(&want)?)? / tr.norm())
}

/// `‖Op_τ(b ∗ g) − b{Op_τ(g)}‖ / ‖Op_τ(b ∗ g)‖` in operator norm.
pub fn synthesis_defect<T: Real>(
    b: &SampledFunction<T>,
    g: &SampledFunction<T>,
    tau: T,
    quad: KatoQuadrature,
) -> Result<T> {
    let params = QuantizationParams::new(tau, g.grid);
    let lhs = kernel_from_symbol(&convolve(b, g)?, &params)?;
    let rhs = kato_average(b, &kernel_from_symbol(g, &params)?, quad)?;
    let scale = operator_norm(&lhs)?;
    if scale == T::zero() {
        return operator_norm(&rhs);
    }
    Ok(operator_norm(&lhs.sub(&rhs)?)? / scale)
}
