//! Fourier multipliers on `ℝ^{n₁} × ℝ^{n₂}`: mixed Bessel symbols, envelope
//! constants, the continuous dyadic decomposition and `L^p` probes.
//!
//! A multiplier acting on functions over a position grid `grid` is sampled on
//! `grid.dual()`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{PsidoError, Result};
use crate::fourier::{fourier_xstar, spectral_multiplier, Sign};
use crate::grid::{lp_norm, sample_real, GridSpec, SampledFunction, SpaceTag};
use crate::scalar::{japanese, Real};
use crate::symclass::spectral_derivative;

type Evaluator<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;

/// A real symbol `a(ξ₁, ξ₂)` with its degree pair `(m₁, m₂)`.
#[derive(Clone)]
pub struct MixedSymbolSpec<T> {
    pub n1: usize,
    pub n2: usize,
    pub m1: T,
    pub m2: T,
    pub name: String,
    eval: Evaluator<T>,
}

impl<T: Real> fmt::Debug for MixedSymbolSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixedSymbolSpec")
            .field("name", &self.name)
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .field("m1", &self.m1)
            .field("m2", &self.m2)
            .finish()
    }
}

impl<T: Real> MixedSymbolSpec<T> {
    pub fn new(
        name: &str,
        n1: usize,
        n2: usize,
        m1: T,
        m2: T,
        eval: impl Fn(&[T], &[T]) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(PsidoError::Shape("both blocks need positive dimension".into()));
        }
        Ok(MixedSymbolSpec { n1, n2, m1, m2, name: name.into(), eval: Arc::new(eval) })
    }

    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }

    /// `a(ξ)` at a point of `ℝ^{n₁+n₂}`.
    pub fn eval(&self, xi: &[T]) -> T {
        (self.eval)(&xi[..self.n1], &xi[self.n1..])
    }

    /// The symbol on the frequency lattice of `grid`.
    pub fn sample(&self, grid: GridSpec<T>) -> Result<SampledFunction<T>> {
        self.check_grid(&grid)?;
        sample_real(|xi| self.eval(xi), grid.dual(), SpaceTag::Xstar)
    }

    fn check_grid(&self, grid: &GridSpec<T>) -> Result<()> {
        if grid.dim() != self.dim() {
            return Err(PsidoError::Shape(format!("grid of dim {} for a symbol on ℝ^{}", grid.dim(), self.dim())));
        }
        Ok(())
    }
}

/// `⟨ξ₁⟩^{s₁} ⟨ξ₂⟩^{s₂} ⟨(ξ₁, ξ₂)⟩^{−s₁−s₂−ε}`, of degree `(−ε/2, −ε/2)`.
pub fn mixed_bessel_symbol<T: Real>(s1: T, s2: T, eps: T, n1: usize, n2: usize) -> Result<MixedSymbolSpec<T>> {
    if !(eps > T::zero()) {
        return Err(PsidoError::Domain(format!("eps must be positive, got {eps}")));
    }
    if s1 < T::zero() || s2 < T::zero() {
        return Err(PsidoError::Domain("Bessel exponents must be nonnegative".into()));
    }
    let half = eps / T::of(2.0);
    MixedSymbolSpec::new(&format!("mixed_bessel({s1},{s2},{eps})"), n1, n2, -half, -half, move |a: &[T], b: &[T]| {
        let full = (T::one() + a.iter().chain(b).map(|&v| v * v).sum::<T>()).sqrt();
        japanese(a).powf(s1) * japanese(b).powf(s2) * full.powf(-s1 - s2 - eps)
    })
}

/// Empirical constant for one derivative multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeEntry<T> {
    /// Derivative order on each axis, block 1 first.
    pub alpha: Vec<u32>,
    pub order1: u32,
    pub order2: u32,
    pub constant: T,
}

fn binomial(k: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// Central difference `∂^α f(x)` with step `delta` on every differentiated axis.
fn central_difference<T: Real>(f: &dyn Fn(&[T]) -> T, x: &[T], alpha: &[u32], delta: T) -> T {
    let axes: Vec<usize> = (0..alpha.len()).filter(|&a| alpha[a] > 0).collect();
    let mut total = T::zero();
    let mut counters = vec![0u32; axes.len()];
    let mut point = x.to_vec();
    loop {
        let mut coef = T::one();
        for (slot, &ax) in axes.iter().enumerate() {
            let (k, j) = (alpha[ax], counters[slot]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coef *= T::of(sign * binomial(k, j));
            point[ax] = x[ax] + T::of(k as f64 / 2.0 - j as f64) * delta;
        }
        total += coef * f(&point);
        let mut slot = 0;
        while slot < axes.len() {
            counters[slot] += 1;
            if counters[slot] <= alpha[axes[slot]] {
                break;
            }
            counters[slot] = 0;
            slot += 1;
        }
        if slot == axes.len() {
            break;
        }
    }
    let order: u32 = alpha.iter().sum();
    total / delta.powi(order as i32)
}

/// Richardson-extrapolated central difference.
fn derivative<T: Real>(f: &dyn Fn(&[T]) -> T, x: &[T], alpha: &[u32]) -> T {
    if alpha.iter().all(|&a| a == 0) {
        return f(x);
    }
    let delta = T::of(0.02);
    let coarse = central_difference(f, x, alpha, delta);
    let fine = central_difference(f, x, alpha, delta / T::of(2.0));
    (T::of(4.0) * fine - coarse) / T::of(3.0)
}

/// Per-axis multi-indices with block totals at most `max_order`.
fn block_indices(n1: usize, n2: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for ax in 0..n1 + n2 {
        let mut next = Vec::new();
        for prefix in &out {
            for o in 0..=max_order {
                let mut v: Vec<u32> = prefix.clone();
                v.push(o);
                let range = if ax < n1 { 0..n1.min(v.len()) } else { n1..v.len() };
                if v[range].iter().sum::<u32>() <= max_order {
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

/// `max |∂^{α₁}∂^{α₂}a| / (⟨ξ₁⟩^{m₁−|α₁|}⟨ξ₂⟩^{m₂−|α₂|})` over the frequency lattice of `grid`.
pub fn envelope_check<T: Real>(spec: &MixedSymbolSpec<T>, max_order: u32, grid: GridSpec<T>) -> Result<Vec<EnvelopeEntry<T>>> {
    spec.check_grid(&grid)?;
    let freq = grid.dual();
    let tag = SpaceTag::Xstar;
    let points: Vec<Vec<T>> = (0..freq.len(&tag)).map(|i| freq.point(&tag, i)).collect();
    let f = |x: &[T]| spec.eval(x);
    let mut out = Vec::new();
    for alpha in block_indices(spec.n1, spec.n2, max_order) {
        let order1: u32 = alpha[..spec.n1].iter().sum();
        let order2: u32 = alpha[spec.n1..].iter().sum();
        let mut worst = T::zero();
        for xi in &points {
            let env = japanese(&xi[..spec.n1]).powf(spec.m1 - T::of(order1 as f64))
                * japanese(&xi[spec.n1..]).powf(spec.m2 - T::of(order2 as f64));
            worst = worst.max(derivative(&f, xi, &alpha).abs() / env);
        }
        out.push(EnvelopeEntry { alpha, order1, order2, constant: worst });
    }
    Ok(out)
}

fn smooth_step_core<T: Real>(t: T) -> T {
    if t > T::zero() {
        (-t.recip()).exp()
    } else {
        T::zero()
    }
}

/// Radial cutoff: `1` for `|ξ| ≤ 1`, `0` for `|ξ| ≥ 2`, smooth in between.
pub fn cutoff_phi<T: Real>(xi: &[T]) -> T {
    let r = xi.iter().map(|&v| v * v).sum::<T>().sqrt();
    if r <= T::one() {
        return T::one();
    }
    if r >= T::of(2.0) {
        return T::zero();
    }
    let a = smooth_step_core(T::of(2.0) - r);
    let b = smooth_step_core(r - T::one());
    a / (a + b)
}

/// `ψ(ξ) = −ξ·∇φ(ξ)`, supported in `1 ≤ |ξ| ≤ 2`.
pub fn cutoff_psi<T: Real>(xi: &[T]) -> T {
    let r = xi.iter().map(|&v| v * v).sum::<T>().sqrt();
    if r <= T::one() || r >= T::of(2.0) {
        return T::zero();
    }
    let (u, v) = (T::of(2.0) - r, r - T::one());
    let a = smooth_step_core(u);
    let b = smooth_step_core(v);
    let s = a + b;
    r * a * b / (s * s) * ((u * u).recip() + (v * v).recip())
}

/// Log-uniform nodes `t_k = e^{kΔ}` on `[1, T]` with Gregory end corrections for `∫ dt/t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicQuadrature<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> DyadicQuadrature<T> {
    pub fn new(count: usize, t_max: T) -> Result<Self> {
        if count < 6 {
            return Err(PsidoError::Domain(format!("need at least 6 nodes, got {count}")));
        }
        if !(t_max > T::one()) {
            return Err(PsidoError::Domain(format!("upper node must exceed 1, got {t_max}")));
        }
        let delta = t_max.ln() / T::of_usize(count - 1);
        let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
        let weights = (0..count)
            .map(|k| {
                let e = k.min(count - 1 - k);
                delta * if e < 3 { T::of(ends[e]) } else { T::one() }
            })
            .collect();
        let nodes = (0..count).map(|k| (delta * T::of_usize(k)).exp()).collect();
        Ok(DyadicQuadrature { nodes, weights })
    }

    /// Nodes up to the largest block radius on the frequency lattice of `grid`.
    pub fn for_grid(count: usize, grid: &GridSpec<T>, block_dim: usize) -> Result<Self> {
        let edge = grid.dual().half_width();
        Self::new(count, edge * T::of_usize(block_dim).sqrt())
    }

    /// `φ(ξ) + Σ_k w_k ψ(ξ/t_k)`.
    pub fn partition(&self, xi: &[T]) -> T {
        let mut scaled = xi.to_vec();
        let mut s = cutoff_phi(xi);
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            for (o, &v) in scaled.iter_mut().zip(xi) {
                *o = v / t;
            }
            s += w * cutoff_psi(&scaled);
        }
        s
    }
}

/// `max |φ(ξ) + Σ w_k ψ(ξ/t_k) − 1|` over the frequency lattice of an `n`-dimensional grid.
pub fn partition_of_unity_defect<T: Real>(quad: &DyadicQuadrature<T>, grid: GridSpec<T>) -> T {
    let freq = grid.dual();
    (0..freq.len(&SpaceTag::Xstar))
        .map(|i| (quad.partition(&freq.point(&SpaceTag::Xstar, i)) - T::one()).abs())
        .fold(T::zero(), |m, v| m.max(v))
}

/// Which cutoff acts on each block of a dyadic piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceKind {
    /// `(φ₁ ⊗ φ₂) a`
    Base,
    /// `(ψ₁ ⊗ φ₂) a_{t₁,1}`
    Outer1,
    /// `(φ₁ ⊗ ψ₂) a_{1,t₂}`
    Outer2,
    /// `(ψ₁ ⊗ ψ₂) a_{t₁,t₂}`
    Outer12,
}

/// Summary of one rescaled piece on the reference grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPiece<T> {
    pub kind: PieceKind,
    pub t1: T,
    pub t2: T,
    /// Quadrature weight `w₁w₂` (1 on a φ block).
    pub weight: T,
    /// `max_{|α| ≤ 2} sup ⟨η⟩² |∂^α piece|`.
    pub seminorm: T,
    /// The piece vanishes identically outside its cutoff supports.
    pub support_exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition<T> {
    pub pieces: Vec<DyadicPiece<T>>,
    /// `max |Σ pieces − a|` over the frequency lattice.
    pub reconstruction_defect: T,
    /// Set when the defect exceeds the requested tolerance.
    pub advisory: Option<String>,
}

impl<T: Real> DyadicDecomposition<T> {
    pub fn max_seminorm(&self) -> T {
        self.pieces.iter().fold(T::zero(), |m, p| m.max(p.seminorm))
    }

    pub fn supports_exact(&self) -> bool {
        self.pieces.iter().all(|p| p.support_exact)
    }
}

/// Reference grid for rescaled pieces: 32 points per axis on `[−2.5, 2.5)`.
pub fn reference_grid<T: Real>(dim: usize) -> Result<GridSpec<T>> {
    GridSpec::new(dim, 32, T::of(2.5))
}

fn block_norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Samples of the piece `kind` at scales `(t₁, t₂)` on the reference grid.
pub fn dyadic_piece<T: Real>(spec: &MixedSymbolSpec<T>, kind: PieceKind, t1: T, t2: T, reference: GridSpec<T>) -> Result<SampledFunction<T>> {
    spec.check_grid(&reference)?;
    let n1 = spec.n1;
    let (c1, c2): (fn(&[T]) -> T, fn(&[T]) -> T) = match kind {
        PieceKind::Base => (cutoff_phi, cutoff_phi),
        PieceKind::Outer1 => (cutoff_psi, cutoff_phi),
        PieceKind::Outer2 => (cutoff_phi, cutoff_psi),
        PieceKind::Outer12 => (cutoff_psi, cutoff_psi),
    };
    let scale = t1.powf(-spec.m1) * t2.powf(-spec.m2);
    sample_real(
        |eta| {
            let cut = c1(&eta[..n1]) * c2(&eta[n1..]);
            if cut == T::zero() {
                return T::zero();
            }
            let xi: Vec<T> = eta.iter().enumerate().map(|(k, &v)| if k < n1 { v * t1 } else { v * t2 }).collect();
            cut * scale * spec.eval(&xi)
        },
        reference,
        SpaceTag::X,
    )
}

fn piece_seminorm<T: Real>(piece: &SampledFunction<T>) -> Result<T> {
    let axes = piece.axes();
    let mut alphas = vec![vec![0u32; axes]];
    for a in 0..axes {
        let mut e = vec![0u32; axes];
        e[a] = 1;
        alphas.push(e.clone());
        e[a] = 2;
        alphas.push(e);
        for b in a + 1..axes {
            let mut m = vec![0u32; axes];
            m[a] = 1;
            m[b] = 1;
            alphas.push(m);
        }
    }
    let mut best = T::zero();
    for alpha in alphas {
        let d = spectral_derivative(piece, &alpha)?;
        for (idx, z) in d.values.iter().enumerate() {
            let w = T::one() + piece.point(idx).iter().map(|&v| v * v).sum::<T>();
            best = best.max(w * z.norm());
        }
    }
    Ok(best)
}

fn support_exact<T: Real>(piece: &SampledFunction<T>, kind: PieceKind, n1: usize) -> bool {
    let (psi1, psi2) = match kind {
        PieceKind::Base => (false, false),
        PieceKind::Outer1 => (true, false),
        PieceKind::Outer2 => (false, true),
        PieceKind::Outer12 => (true, true),
    };
    let inside = |r: T, psi: bool| if psi { r >= T::one() && r <= T::of(2.0) } else { r <= T::of(2.0) };
    piece.values.iter().enumerate().all(|(idx, z)| {
        let eta = piece.point(idx);
        let ok = inside(block_norm(&eta[..n1]), psi1) && inside(block_norm(&eta[n1..]), psi2);
        ok || (z.re == T::zero() && z.im == T::zero())
    })
}

/// Splits `a` into the base piece and the three families of rescaled annular pieces.
///
/// The reconstruction `a₀ + Σ w t^{m} piece(ξ/t)` is compared with `a` on the
/// frequency lattice of `grid`; exceeding `tolerance` only sets the advisory.
pub fn dyadic_decompose<T: Real>(
    spec: &MixedSymbolSpec<T>,
    quad: &DyadicQuadrature<T>,
    grid: GridSpec<T>,
    tolerance: T,
) -> Result<DyadicDecomposition<T>> {
    spec.check_grid(&grid)?;
    let reference = reference_grid(spec.dim())?;
    let one = T::one();
    let mut jobs = vec![(PieceKind::Base, one, one, one)];
    for (&t, &w) in quad.nodes.iter().zip(&quad.weights) {
        jobs.push((PieceKind::Outer1, t, one, w));
        jobs.push((PieceKind::Outer2, one, t, w));
    }
    for (&t1, &w1) in quad.nodes.iter().zip(&quad.weights) {
        for (&t2, &w2) in quad.nodes.iter().zip(&quad.weights) {
            jobs.push((PieceKind::Outer12, t1, t2, w1 * w2));
        }
    }
    let mut pieces = Vec::with_capacity(jobs.len());
    for &(kind, t1, t2, weight) in &jobs {
        let samples = dyadic_piece(spec, kind, t1, t2, reference)?;
        pieces.push(DyadicPiece {
            kind,
            t1,
            t2,
            weight,
            seminorm: piece_seminorm(&samples)?,
            support_exact: support_exact(&samples, kind, spec.n1),
        });
    }

    let n1 = spec.n1;
    let freq = grid.dual();
    let mut defect = T::zero();
    for idx in 0..freq.len(&SpaceTag::Xstar) {
        let xi = freq.point(&SpaceTag::Xstar, idx);
        let a = spec.eval(&xi);
        let (x1, x2) = (&xi[..n1], &xi[n1..]);
        let (phi1, phi2) = (cutoff_phi(x1), cutoff_phi(x2));
        let psi = |v: &[T], t: T| cutoff_psi(&v.iter().map(|&c| c / t).collect::<Vec<_>>());
        let psi1: Vec<T> = quad.nodes.iter().map(|&t| psi(x1, t)).collect();
        let psi2: Vec<T> = quad.nodes.iter().map(|&t| psi(x2, t)).collect();
        // each rescaled piece evaluated at ξ/t and multiplied back by t^{m} reproduces cutoff · a(ξ)
        let mut sum = phi1 * phi2;
        for k in 0..quad.nodes.len() {
            sum += quad.weights[k] * (psi1[k] * phi2 + phi1 * psi2[k]);
        }
        let outer: T = psi1.iter().zip(&quad.weights).map(|(&p, &w)| p * w).sum::<T>()
            * psi2.iter().zip(&quad.weights).map(|(&p, &w)| p * w).sum::<T>();
        defect = defect.max((a * (sum + outer) - a).abs());
    }
    let advisory = (defect > tolerance).then(|| format!("reconstruction defect {defect} exceeds {tolerance}; add t-nodes"));
    Ok(DyadicDecomposition { pieces, reconstruction_defect: defect, advisory })
}

/// `‖F^{−1}a‖_{L¹}` on each refinement grid.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Report<T> {
    pub norms: Vec<T>,
    /// Set when a degree is nonnegative and integrability is not expected.
    pub advisory: Option<String>,
}

impl<T: Real> L1Report<T> {
    /// Successive differences `|‖·‖_{k+1} − ‖·‖_k|`.
    pub fn differences(&self) -> Vec<T> {
        self.norms.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }

    /// Differences strictly decreasing.
    pub fn is_cauchy(&self) -> bool {
        let d = self.differences();
        !d.is_empty() && d.windows(2).all(|w| w[1] < w[0])
    }
}

/// Convolution kernel `F^{−1}a` on the position lattice of `grid`.
pub fn inverse_transform<T: Real>(spec: &MixedSymbolSpec<T>, grid: GridSpec<T>) -> Result<SampledFunction<T>> {
    fourier_xstar(&spec.sample(grid)?, Sign::Conjugate)
}

pub fn inverse_transform_l1<T: Real>(spec: &MixedSymbolSpec<T>, refinements: &[GridSpec<T>]) -> Result<L1Report<T>> {
    let norms = refinements
        .iter()
        .map(|&g| lp_norm(&inverse_transform(spec, g)?, T::one()))
        .collect::<Result<Vec<_>>>()?;
    let advisory = (spec.m1 >= T::zero() || spec.m2 >= T::zero())
        .then(|| format!("degrees ({}, {}) are not both negative; L1 values are envelope data only", spec.m1, spec.m2));
    Ok(L1Report { norms, advisory })
}

/// `C_N = max |F^{−1}a(x)| / (⟨x₁⟩^{−N}⟨x₂⟩^{−N}(1+|x₁|^{−m₁−n₁})(1+|x₂|^{−m₂−n₂}))` off the axes.
pub fn inverse_transform_envelope<T: Real>(spec: &MixedSymbolSpec<T>, grid: GridSpec<T>, orders: &[u32]) -> Result<Vec<(u32, T)>> {
    let k = inverse_transform(spec, grid)?;
    let n1 = spec.n1;
    let (e1, e2) = (-spec.m1 - T::of_usize(spec.n1), -spec.m2 - T::of_usize(spec.n2));
    Ok(orders
        .iter()
        .map(|&order| {
            let mut worst = T::zero();
            for (idx, z) in k.values.iter().enumerate() {
                let x = k.point(idx);
                let (r1, r2) = (block_norm(&x[..n1]), block_norm(&x[n1..]));
                if r1 == T::zero() || r2 == T::zero() {
                    continue;
                }
                let env = japanese(&x[..n1]).powi(-(order as i32))
                    * japanese(&x[n1..]).powi(-(order as i32))
                    * (T::one() + r1.powf(e1))
                    * (T::one() + r2.powf(e2));
                worst = worst.max(z.norm() / env);
            }
            (order, worst)
        })
        .collect())
}

/// `a(P) f` computed spectrally on the grid of `f`.
pub fn apply_multiplier<T: Real>(spec: &MixedSymbolSpec<T>, f: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    f.require("X")?;
    spec.check_grid(&f.grid)?;
    Ok(spectral_multiplier(f, |kappa, _| Complex::new(spec.eval(kappa), T::zero())))
}

/// Gaussians, compact bumps and seeded random band-limited functions on `grid`.
pub fn standard_family<T: Real>(grid: GridSpec<T>, random: usize, seed: u64) -> Result<Vec<SampledFunction<T>>> {
    let l = grid.half_width();
    let mut family = Vec::new();
    for width in [0.1, 0.25, 0.5] {
        let s = T::of(width) * l;
        family.push(sample_real(|x| (-x.iter().map(|&v| v * v).sum::<T>() / (s * s)).exp(), grid, SpaceTag::X)?);
    }
    for (c, r) in [(0.0, 0.4), (0.3, 0.2)] {
        let (c, r) = (T::of(c) * l, T::of(r) * l);
        family.push(sample_real(
            |x| {
                let d2 = x.iter().map(|&v| (v - c) * (v - c)).sum::<T>() / (r * r);
                if d2 < T::one() {
                    (-(T::one() - d2).recip()).exp()
                } else {
                    T::zero()
                }
            },
            grid,
            SpaceTag::X,
        )?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.samples_per_axis();
    for _ in 0..random {
        let coeffs: Vec<(f64, f64)> = (0..grid.len(&SpaceTag::X))
            .map(|_| (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let white = SampledFunction::from_values(
            SpaceTag::X,
            grid,
            coeffs.iter().map(|&(a, b)| Complex::new(T::of(a), T::of(b))).collect(),
        )?;
        let cut = T::of_usize(n / 4) * grid.dual().spacing();
        family.push(spectral_multiplier(&white, |kappa, _| {
            let inside = kappa.iter().all(|&k| k.abs() < cut);
            Complex::new(if inside { T::one() } else { T::zero() }, T::zero())
        }));
    }
    Ok(family)
}

/// Ratios `‖a(P)f‖_p / ‖f‖_p` over a test family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable<T> {
    pub p: T,
    pub ratios: Vec<T>,
}

impl<T: Real> ProbeTable<T> {
    pub fn max(&self) -> T {
        self.ratios.iter().fold(T::zero(), |m, &r| m.max(r))
    }
}

fn ratio_table<T: Real>(p: T, family: &[SampledFunction<T>], op: impl Fn(&SampledFunction<T>) -> Result<SampledFunction<T>>) -> Result<ProbeTable<T>> {
    let ratios = family
        .iter()
        .map(|f| {
            let den = lp_norm(f, p)?;
            if den == T::zero() {
                return Err(PsidoError::Domain("test function has zero norm".into()));
            }
            Ok(lp_norm(&op(f)?, p)? / den)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeTable { p, ratios })
}

pub fn multiplier_bound_probe<T: Real>(spec: &MixedSymbolSpec<T>, p: T, family: &[SampledFunction<T>]) -> Result<ProbeTable<T>> {
    ratio_table(p, family, |f| apply_multiplier(spec, f))
}

/// Per-factor, composed and direct probes for `Π_l ⟨ξ_l⟩^{s_l}⟨ξ⟩^{−s_l−ε/k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorReport<T> {
    pub factors: Vec<ProbeTable<T>>,
    pub composed: ProbeTable<T>,
    pub direct: ProbeTable<T>,
    /// `max ‖T₁⋯T_k f − a(P)f‖_∞ / ‖a(P)f‖_∞` over the family.
    pub factorization_defect: T,
}

pub fn tcp5_factor_check<T: Real>(
    s: &[T],
    blocks: &[usize],
    eps: T,
    p: T,
    family: &[SampledFunction<T>],
) -> Result<FactorReport<T>> {
    let k = blocks.len();
    if k < 2 || s.len() != k {
        return Err(PsidoError::Shape(format!("need at least two blocks with one exponent each, got {} and {}", blocks.len(), s.len())));
    }
    if !(eps > T::zero()) {
        return Err(PsidoError::Domain(format!("eps must be positive, got {eps}")));
    }
    let dim: usize = blocks.iter().sum();
    if let Some(f) = family.iter().find(|f| f.grid.dim() != dim || f.tag != SpaceTag::X) {
        return Err(PsidoError::Shape(format!("test function on {} axes for {dim} block coordinates", f.axes())));
    }
    let starts: Vec<usize> = blocks.iter().scan(0, |acc, &b| {
        let s = *acc;
        *acc += b;
        Some(s)
    }).collect();
    let share = eps / T::of_usize(k);
    let factor = |l: usize| {
        let (start, width, sl) = (starts[l], blocks[l], s[l]);
        move |kappa: &[T]| japanese(&kappa[start..start + width]).powf(sl) * japanese(kappa).powf(-sl - share)
    };
    let direct_symbol = |kappa: &[T]| {
        let total: T = s.iter().copied().sum();
        (0..k).fold(japanese(kappa).powf(-total - eps), |acc, l| acc * japanese(&kappa[starts[l]..starts[l] + blocks[l]]).powf(s[l]))
    };
    let apply = |f: &SampledFunction<T>, m: &dyn Fn(&[T]) -> T| spectral_multiplier(f, |kappa, _| Complex::new(m(kappa), T::zero()));
    let compose = |f: &SampledFunction<T>| (0..k).fold(f.clone(), |acc, l| apply(&acc, &factor(l)));

    let factors = (0..k)
        .map(|l| ratio_table(p, family, |f| Ok(apply(f, &factor(l)))))
        .collect::<Result<Vec<_>>>()?;
    let composed = ratio_table(p, family, |f| Ok(compose(f)))?;
    let direct = ratio_table(p, family, |f| Ok(apply(f, &direct_symbol)))?;
    let mut defect = T::zero();
    for f in family {
        let d = apply(f, &direct_symbol);
        let scale = d.max_abs();
        if scale > T::zero() {
            defect = defect.max(compose(f).max_abs_diff(&d)? / scale);
        }
    }
    Ok(FactorReport { factors, composed, direct, factorization_defect: defect })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2(n: usize, l: f64) -> GridSpec<f64> {
        GridSpec::new(2, n, l).unwrap()
    }

    #[test]
    fn mixed_bessel_values() {
        let a = mixed_bessel_symbol(1.0, 1.0, 0.5, 1, 1).unwrap();
        assert_eq!(a.eval(&[0.0, 0.0]), 1.0);
        assert_eq!((a.m1, a.m2), (-0.25, -0.25));
        let flat = mixed_bessel_symbol(0.0, 0.0, 0.7, 1, 1).unwrap();
        let z = [1.3, -2.0];
        assert!((flat.eval(&z) - (1.0 + 1.69 + 4.0f64).powf(-0.35)).abs() < 1e-15);
        let tail = mixed_bessel_symbol(1.0, 0.0, 0.5, 1, 1).unwrap();
        let r = tail.eval(&[2000.0, 0.0]) / tail.eval(&[1000.0, 0.0]);
        assert!((r - 2f64.powf(-0.5)).abs() < 1e-6);
        assert!(mixed_bessel_symbol(1.0, 1.0, 0.0, 1, 1).is_err());
    }

    #[test]
    fn finite_differences_match_analytic() {
        let f = |x: &[f64]| (x[0] * 0.7).sin() * (x[1] * 1.1).exp();
        let d = derivative(&f, &[0.3, -0.2], &[2, 1]);
        let want = -0.49 * (0.21f64).sin() * 1.1 * (-0.22f64).exp();
        assert!((d - want).abs() < 1e-8, "{d} {want}");
    }

    #[test]
    fn envelope_constants() {
        let a = mixed_bessel_symbol(1.0, 1.0, 0.5, 1, 1).unwrap();
        let rep = envelope_check(&a, 2, g2(32, 4.0)).unwrap();
        assert_eq!(rep.len(), 9);
        assert!(rep[0].constant <= 1.0 + 1e-6);
        assert!(rep.iter().all(|e| e.constant.is_finite()));
        let fine = envelope_check(&a, 2, g2(64, 8.0)).unwrap();
        for (c, f) in rep.iter().zip(&fine) {
            assert!((f.constant / c.constant - 1.0).abs() <= 0.2, "{:?} {} {}", c.alpha, c.constant, f.constant);
        }
        let zero = MixedSymbolSpec::new("zero", 1, 1, -1.0, -1.0, |_: &[f64], _: &[f64]| 0.0).unwrap();
        assert!(envelope_check(&zero, 2, g2(8, 2.0)).unwrap().iter().all(|e| e.constant == 0.0));
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff_phi(&[0.9]), 1.0);
        assert_eq!(cutoff_phi(&[2.0]), 0.0);
        assert_eq!(cutoff_psi(&[0.99]), 0.0);
        assert_eq!(cutoff_psi(&[-2.01]), 0.0);
        for k in 1..100 {
            let r = 1.0 + k as f64 / 100.0;
            let h = 1e-6;
            let dphi = (cutoff_phi(&[r + h]) - cutoff_phi(&[r - h])) / (2.0 * h);
            assert!((cutoff_psi(&[r]) + r * dphi).abs() < 1e-6);
            assert!((0.0..=1.0).contains(&cutoff_phi(&[r])));
        }
    }

    #[test]
    fn partition_of_unity() {
        let g = GridSpec::new(1, 32, 8.0).unwrap();
        let quad = DyadicQuadrature::for_grid(64, &g, 1).unwrap();
        assert!((quad.nodes[63] - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(partition_of_unity_defect(&quad, g) < 1e-3);
        assert!(DyadicQuadrature::<f64>::new(64, 1.0).is_err());
    }

    #[test]
    fn constant_symbol_decomposition() {
        let g = g2(32, 8.0);
        let one = MixedSymbolSpec::new("one", 1, 1, 0.0, 0.0, |_: &[f64], _: &[f64]| 1.0).unwrap();
        let quad = DyadicQuadrature::for_grid(16, &GridSpec::new(1, 32, 8.0).unwrap(), 1).unwrap();
        let dec = dyadic_decompose(&one, &quad, g, 1e-3).unwrap();
        assert_eq!(dec.pieces.len(), 1 + 2 * 16 + 256);
        assert!(dec.supports_exact());
        let pu = partition_of_unity_defect(&quad, GridSpec::new(1, 32, 8.0).unwrap());
        assert!(dec.reconstruction_defect <= 2.0 * pu + pu * pu + 1e-12);
    }

    #[test]
    fn pieces_bounded_in_schwartz_space() {
        let a = mixed_bessel_symbol(1.0, 1.0, 0.5, 1, 1).unwrap();
        let quad = DyadicQuadrature::new(12, 200.0).unwrap();
        let dec = dyadic_decompose(&a, &quad, g2(16, 4.0), 1.0).unwrap();
        let early = dec.pieces.iter().filter(|p| p.t1 <= 10.0 && p.t2 <= 10.0).fold(0.0f64, |m, p| m.max(p.seminorm));
        assert!(dec.max_seminorm().is_finite() && dec.max_seminorm() <= 2.0 * early, "{early} {}", dec.max_seminorm());
    }

    #[test]
    fn compact_symbol_l1_is_stable() {
        let bump = MixedSymbolSpec::new("bump", 1, 1, -1.0, -1.0, |a: &[f64], b: &[f64]| cutoff_phi(a) * cutoff_phi(b)).unwrap();
        let grids: Vec<GridSpec<f64>> = [64, 128].iter().map(|&n| g2(n, 16.0)).collect();
        let rep = inverse_transform_l1(&bump, &grids).unwrap();
        assert!((rep.norms[1] - rep.norms[0]).abs() < 1e-3);
        assert!(rep.advisory.is_none());
        let flat = MixedSymbolSpec::new("one", 1, 1, 0.0, 0.0, |_: &[f64], _: &[f64]| 1.0).unwrap();
        assert!(inverse_transform_l1(&flat, &grids[..1]).unwrap().advisory.is_some());
    }

    #[test]
    fn mixed_l1_sequence_is_cauchy() {
        let a = mixed_bessel_symbol(1.0, 1.0, 0.5, 1, 1).unwrap();
        let r2 = 2f64.sqrt();
        let grids: Vec<GridSpec<f64>> = [(64, 4.0 * r2), (128, 8.0), (256, 8.0 * r2), (512, 16.0)].iter().map(|&(n, l)| g2(n, l)).collect();
        let rep = inverse_transform_l1(&a, &grids).unwrap();
        assert!(rep.is_cauchy(), "{:?}", rep.differences());
        let env = inverse_transform_envelope(&a, grids[0], &[1, 2]).unwrap();
        assert!(env.iter().all(|(_, c)| c.is_finite() && *c > 0.0));
    }

    #[test]
    fn probes() {
        let g = g2(16, 4.0);
        let family = standard_family(g, 3, 1).unwrap();
        let one = MixedSymbolSpec::new("one", 1, 1, 0.0, 0.0, |_: &[f64], _: &[f64]| 1.0).unwrap();
        for p in [1.0, 2.0] {
            assert!(multiplier_bound_probe(&one, p, &family).unwrap().ratios.iter().all(|r| (r - 1.0).abs() < 1e-12));
        }
        let a = mixed_bessel_symbol(1.0, 1.0, 0.5, 1, 1).unwrap();
        let sup = a.sample(g).unwrap().max_abs();
        assert!(multiplier_bound_probe(&a, 2.0, &family).unwrap().max() <= sup + 1e-6);
        let l1 = lp_norm(&inverse_transform(&a, g).unwrap(), 1.0).unwrap();
        assert!(multiplier_bound_probe(&a, 1.0, &family).unwrap().max() <= l1 + 1e-3);
    }

    #[test]
    fn factorization() {
        let g = g2(16, 4.0);
        let family = standard_family(g, 2, 3).unwrap();
        let rep = tcp5_factor_check(&[1.0, 1.0], &[1, 1], 0.5, 2.0, &family).unwrap();
        assert!(rep.factorization_defect < 1e-8);
        let a = mixed_bessel_symbol(1.0, 1.0, 0.5, 1, 1).unwrap();
        let direct = multiplier_bound_probe(&a, 2.0, &family).unwrap();
        for (x, y) in rep.direct.ratios.iter().zip(&direct.ratios) {
            assert!((x - y).abs() < 1e-12);
        }
        let flat = tcp5_factor_check(&[0.0, 0.0], &[1, 1], 0.5, 2.0, &family).unwrap();
        assert!(flat.factors.iter().all(|t| t.max() <= 1.0 + 1e-6));
        assert!(tcp5_factor_check(&[1.0], &[2], 0.5, 2.0, &family).is_err());
    }
}
