//! Derivative seminorms, Sobolev norms, Bessel smoothing and random symbols.
//!
//! All derivatives and multipliers act in the plain Fourier domain of phase
//! space viewed as `ℝ^{2n}`, so they are exact on band-limited samples.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PsidoError, Result};
use crate::fourier::{axis_freq_spacing, plain_forward, plain_inverse};
use crate::grid::{lp_norm, unravel, GridJson, GridSpec, SampledFunction, SpaceTag};
use crate::scalar::{japanese, Real};

/// Name and version of the random symbol generator.
pub const GENERATOR: &str = "chacha8-v1";

/// Per-block derivative caps for `|a|_{p,m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormSpec<T> {
    pub p: T,
    pub orders_x: Vec<u32>,
    pub orders_p: Vec<u32>,
}

impl<T: Real> SeminormSpec<T> {
    /// `m_j = ⌊n_j/2⌋ + 1` on every block.
    pub fn standard(p: T, blocks: &[usize]) -> Self {
        let m: Vec<u32> = blocks.iter().map(|&b| (b / 2 + 1) as u32).collect();
        SeminormSpec { p, orders_x: m.clone(), orders_p: m }
    }

    /// [`SeminormSpec::standard`] with caps doubled when `τ ≠ 0`.
    pub fn for_tau(p: T, blocks: &[usize], tau: T) -> Self {
        let mut s = Self::standard(p, blocks);
        if tau != T::zero() {
            s.orders_x.iter_mut().chain(s.orders_p.iter_mut()).for_each(|m| *m *= 2);
        }
        s
    }

    pub fn uniform(p: T, blocks: usize, m: u32) -> Self {
        SeminormSpec { p, orders_x: vec![m; blocks], orders_p: vec![m; blocks] }
    }
}

/// Conjugate frequency of each axis of `f` at transform index digits.
fn frequencies<T: Real>(f: &SampledFunction<T>, digits: &[usize], steps: &[T]) -> Vec<T> {
    let half = (f.grid.samples_per_axis() / 2) as f64;
    digits.iter().zip(steps).map(|(&d, &s)| T::of(d as f64 - half) * s).collect()
}

fn apply_spectrum<T: Real>(
    f: &SampledFunction<T>,
    spec: &[Complex<T>],
    m: impl Fn(&[T], &[usize]) -> Complex<T>,
) -> SampledFunction<T> {
    let n = f.grid.samples_per_axis();
    let axes = f.axes();
    let steps = axis_freq_spacing(f);
    let out = spec
        .iter()
        .enumerate()
        .map(|(idx, &z)| {
            let digits = unravel(idx, n, axes);
            z * m(&frequencies(f, &digits, &steps), &digits)
        })
        .collect();
    plain_inverse(out, f)
}

fn derivative_factor<T: Real>(kappa: &[T], digits: &[usize], alpha: &[u32]) -> Complex<T> {
    let mut out = Complex::new(T::one(), T::zero());
    for ((&k, &d), &a) in kappa.iter().zip(digits).zip(alpha) {
        if a == 0 {
            continue;
        }
        if d == 0 && a % 2 == 1 {
            return Complex::new(T::zero(), T::zero());
        }
        out *= Complex::new(T::zero(), k).powu(a);
    }
    out
}

/// `∂^α f` for one order per axis; odd derivatives vanish on the Nyquist mode.
pub fn spectral_derivative<T: Real>(f: &SampledFunction<T>, alpha: &[u32]) -> Result<SampledFunction<T>> {
    if alpha.len() != f.axes() {
        return Err(PsidoError::Shape(format!("{} orders for {} axes", alpha.len(), f.axes())));
    }
    if alpha.iter().all(|&a| a == 0) {
        return Ok(f.clone());
    }
    let spec = plain_forward(f);
    Ok(apply_spectrum(f, &spec, |k, d| derivative_factor(k, d, alpha)))
}

/// Block layout of a phase-space function: `(first axis, width)` per x-block, then per p-block.
fn block_axes<T: Real>(a: &SampledFunction<T>) -> Result<Vec<(usize, usize)>> {
    a.require("Phase")?;
    let n = a.grid.dim();
    let blocks = a.tag.blocks(n);
    let mut out = Vec::with_capacity(2 * blocks.len());
    for offset in [0, n] {
        let mut start = offset;
        for &b in &blocks {
            out.push((start, b));
            start += b;
        }
    }
    Ok(out)
}

/// Every per-axis multi-index whose block sums stay within `caps`.
fn multi_indices(layout: &[(usize, usize)], caps: &[u32], axes: usize) -> Vec<Vec<u32>> {
    let mut cap_of = vec![0u32; axes];
    let mut block_of = vec![0usize; axes];
    for (j, &(start, width)) in layout.iter().enumerate() {
        for ax in start..start + width {
            cap_of[ax] = caps[j];
            block_of[ax] = j;
        }
    }
    let mut out = vec![vec![]];
    for ax in 0..axes {
        let mut next = Vec::new();
        for prefix in &out {
            for o in 0..=cap_of[ax] {
                let mut v: Vec<u32> = prefix.clone();
                v.push(o);
                let used: u32 = (0..=ax).filter(|&b| block_of[b] == block_of[ax]).map(|b| v[b]).sum();
                if used <= caps[block_of[ax]] {
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

/// `max ‖∂_x^α ∂_p^β a‖_{L^p}` over `|α_j| ≤ m_j`, `|β_j| ≤ m_j` per block.
pub fn seminorm<T: Real>(a: &SampledFunction<T>, spec: &SeminormSpec<T>) -> Result<T> {
    let layout = block_axes(a)?;
    let k = layout.len() / 2;
    if spec.orders_x.len() != k || spec.orders_p.len() != k {
        return Err(PsidoError::Shape(format!("seminorm caps do not match {k} blocks")));
    }
    let caps: Vec<u32> = spec.orders_x.iter().chain(&spec.orders_p).copied().collect();
    let mut best = lp_norm(a, spec.p)?;
    let indices = multi_indices(&layout, &caps, a.axes());
    if indices.len() == 1 {
        return Ok(best);
    }
    let fa = plain_forward(a);
    for alpha in indices.iter().filter(|al| al.iter().any(|&o| o > 0)) {
        let d = apply_spectrum(a, &fa, |kap, dig| derivative_factor(kap, dig, alpha));
        best = best.max(lp_norm(&d, spec.p)?);
    }
    Ok(best)
}

/// `‖⟨D⟩^s a‖_{L^p}` with the Bessel multiplier of the full phase-space frequency.
pub fn sobolev_norm<T: Real>(a: &SampledFunction<T>, s: T, p: T) -> Result<T> {
    a.require("Phase")?;
    if s == T::zero() {
        return lp_norm(a, p);
    }
    let spec = plain_forward(a);
    let b = apply_spectrum(a, &spec, |k, _| Complex::new(japanese(k).powf(s), T::zero()));
    lp_norm(&b, p)
}

/// `Π_j (1 − Δ_{X_j})^{t_j} (1 − Δ_{X_j*})^{s_j} a`.
pub fn bessel_smooth<T: Real>(a: &SampledFunction<T>, t: &[T], s: &[T]) -> Result<SampledFunction<T>> {
    let layout = block_axes(a)?;
    let k = layout.len() / 2;
    if t.len() != k || s.len() != k {
        return Err(PsidoError::Shape(format!("smoothing exponents do not match {k} blocks")));
    }
    if t.iter().chain(s).all(|&e| e == T::zero()) {
        return Ok(a.clone());
    }
    let exps: Vec<T> = t.iter().chain(s).map(|&e| e + e).collect();
    let spec = plain_forward(a);
    Ok(apply_spectrum(a, &spec, |kap, _| {
        let m = layout
            .iter()
            .zip(&exps)
            .fold(T::one(), |acc, (&(start, w), &e)| acc * japanese(&kap[start..start + w]).powf(e));
        Complex::new(m, T::zero())
    }))
}

/// Random real band-limited phase-space symbol, normalized to `sup |a| = 1`.
///
/// Fourier coefficients with every centered label `|c| < band_fraction·N/2`
/// are independent complex Gaussians scaled by `⟨κ⟩^{−envelope_decay}`;
/// all others are zero.
pub fn random_symbol<T: Real>(
    seed: u64,
    band_fraction: T,
    envelope_decay: T,
    grid: GridSpec<T>,
) -> Result<SampledFunction<T>> {
    let spec = random_symbol_spectrum(seed, band_fraction, envelope_decay, grid)?;
    let like = SampledFunction::zeros(SpaceTag::phase(grid.dim()), grid);
    let f = plain_inverse(spec, &like).map(|z| Complex::new(z.re, T::zero()));
    let sup = f.max_abs();
    if sup == T::zero() {
        return Err(PsidoError::Domain("band contains no nonzero frequency".into()));
    }
    Ok(f.scale(Complex::new(sup.recip(), T::zero())))
}

/// Plain-transform coefficients behind [`random_symbol`], before normalization.
pub fn random_symbol_spectrum<T: Real>(
    seed: u64,
    band_fraction: T,
    envelope_decay: T,
    grid: GridSpec<T>,
) -> Result<Vec<Complex<T>>> {
    if !(band_fraction > T::zero() && band_fraction <= T::one()) {
        return Err(PsidoError::Domain(format!("band_fraction must lie in (0, 1], got {band_fraction}")));
    }
    if !envelope_decay.is_finite() {
        return Err(PsidoError::Domain("envelope_decay must be finite".into()));
    }
    let like = SampledFunction::zeros(SpaceTag::phase(grid.dim()), grid);
    let n = grid.samples_per_axis();
    let axes = like.axes();
    let steps = axis_freq_spacing(&like);
    let limit = band_fraction.to_f64_lossy() * (n / 2) as f64;
    let in_band = |digits: &[usize]| digits.iter().all(|&d| ((d as f64) - (n / 2) as f64).abs() < limit && d != 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = vec![Complex::new(T::zero(), T::zero()); like.values.len()];
    for (idx, z) in raw.iter_mut().enumerate() {
        let digits = unravel(idx, n, axes);
        if !in_band(&digits) {
            continue;
        }
        let (re, im): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let env = japanese(&frequencies(&like, &digits, &steps)).powf(-envelope_decay);
        *z = Complex::new(T::of(re), T::of(im)) * env;
    }
    let half = T::of(0.5);
    let mirror = |idx: usize| {
        let digits: Vec<usize> = unravel(idx, n, axes).iter().map(|&d| (n - d) % n).collect();
        crate::grid::ravel(&digits, n)
    };
    Ok((0..raw.len()).map(|i| (raw[i] + raw[mirror(i)].conj()) * half).collect())
}

/// Serialized recipe for one random symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolManifest {
    pub seed: u64,
    pub band_fraction: f64,
    pub envelope_decay: f64,
    pub grid: GridJson,
    #[serde(default = "default_generator")]
    pub generator: String,
}

fn default_generator() -> String {
    GENERATOR.into()
}

impl SymbolManifest {
    pub fn new<T: Real>(seed: u64, band_fraction: T, envelope_decay: T, grid: GridSpec<T>) -> Self {
        SymbolManifest {
            seed,
            band_fraction: band_fraction.to_f64_lossy(),
            envelope_decay: envelope_decay.to_f64_lossy(),
            grid: grid.into(),
            generator: GENERATOR.into(),
        }
    }

    pub fn grid<T: Real>(&self) -> Result<GridSpec<T>> {
        GridSpec::try_from(self.grid.clone())
    }

    pub fn realize<T: Real>(&self) -> Result<SampledFunction<T>> {
        if self.generator != GENERATOR {
            return Err(PsidoError::Domain(format!("unknown generator {:?}", self.generator)));
        }
        random_symbol(self.seed, T::of(self.band_fraction), T::of(self.envelope_decay), self.grid()?)
    }
}

/// Real trigonometric interpolation weight between samples `u` apart on an `N`-point axis of period `N·h`.
fn dirichlet<T: Real>(u: T, n: usize, h: T) -> T {
    let w = T::of(2.0) * T::PI() / (T::of_usize(n) * h);
    let mut s = T::one() + (T::of_usize(n / 2) * w * u).cos();
    for c in 1..n / 2 {
        s += T::of(2.0) * (T::of_usize(c) * w * u).cos();
    }
    s / T::of_usize(n)
}

/// Resamples onto `samples` points per axis with the same half-width.
///
/// Position axes are refined by trigonometric interpolation; frequency axes
/// of phase-space functions are extended periodically.
pub fn resample<T: Real>(f: &SampledFunction<T>, samples: usize) -> Result<SampledFunction<T>> {
    let n = f.grid.samples_per_axis();
    if samples < n || samples % 2 != 0 {
        return Err(PsidoError::InvalidGrid(format!("cannot resample {n} points onto {samples}")));
    }
    let dim = f.grid.dim();
    let interp_axes = match f.tag {
        SpaceTag::X => dim,
        SpaceTag::Phase { .. } => dim,
        SpaceTag::Xstar => return Err(PsidoError::Tag { expected: "X or Phase", found: "Xstar".into() }),
    };
    let new_grid = GridSpec::new(dim, samples, f.grid.half_width())?;
    let axes = f.axes();
    let old_h = f.grid.spacing();
    let new_h = new_grid.spacing();
    let table: Vec<Vec<T>> = (0..samples)
        .map(|i| {
            let x = T::of(i as f64 - (samples / 2) as f64) * new_h;
            (0..n).map(|j| dirichlet(x - T::of(j as f64 - (n / 2) as f64) * old_h, n, old_h)).collect()
        })
        .collect();
    let mut sizes = vec![n; axes];
    let mut data = f.values.clone();
    for ax in 0..axes {
        let outer: usize = sizes[..ax].iter().product();
        let inner: usize = sizes[ax + 1..].iter().product();
        let mut next = vec![Complex::new(T::zero(), T::zero()); outer * samples * inner];
        for o in 0..outer {
            for i in 0..samples {
                for r in 0..inner {
                    let dst = (o * samples + i) * inner + r;
                    next[dst] = if ax < interp_axes {
                        (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + data[(o * n + j) * inner + r] * table[i][j])
                    } else {
                        let c = i as i64 - (samples / 2) as i64;
                        data[(o * n + f.grid.wrap(c)) * inner + r]
                    };
                }
            }
        }
        sizes[ax] = samples;
        data = next;
    }
    SampledFunction::from_values(f.tag.clone(), new_grid, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::cordes_symbol;
    use crate::fourier::convolve;
    use crate::grid::sample_real;
    use crate::weyl::roll;

    fn g1(n: usize, l: f64) -> GridSpec<f64> {
        GridSpec::new(1, n, l).unwrap()
    }

    #[test]
    fn zero_and_trivial_orders() {
        let g = g1(16, 3.0);
        let z = SampledFunction::zeros(SpaceTag::phase(1), g);
        assert_eq!(seminorm(&z, &SeminormSpec::standard(2.0, &[1])).unwrap(), 0.0);
        let a = random_symbol(5, 0.5, 1.0, g).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            assert_eq!(seminorm(&a, &SeminormSpec::uniform(p, 1, 0)).unwrap(), lp_norm(&a, p).unwrap());
            assert_eq!(sobolev_norm(&a, 0.0, p).unwrap(), lp_norm(&a, p).unwrap());
        }
    }

    #[test]
    fn plane_wave_derivatives() {
        let g = g1(32, 4.0);
        let step = std::f64::consts::PI / 4.0;
        let k = 3.0 * step;
        let f = sample(|z: &[f64]| Complex::new(0.0, k * z[0] + 2.0 * g.spacing() * z[1]).exp(), g);
        let d = spectral_derivative(&f, &[2, 1]).unwrap();
        let factor = Complex::new(-k * k, 0.0) * Complex::new(0.0, 2.0 * g.spacing());
        for (u, v) in d.values.iter().zip(&f.values) {
            assert!((u - v * factor).norm() < 1e-12 * (1.0 + factor.norm()));
        }
    }

    fn sample(f: impl Fn(&[f64]) -> Complex<f64>, g: GridSpec<f64>) -> SampledFunction<f64> {
        crate::grid::sample(f, g, SpaceTag::phase(1)).unwrap()
    }

    #[test]
    fn nyquist_odd_derivative_vanishes() {
        let g = g1(8, 2.0);
        let f = sample(|z: &[f64]| Complex::new((std::f64::consts::PI * z[0] / g.spacing()).cos(), 0.0), g);
        assert!(spectral_derivative(&f, &[1, 0]).unwrap().max_abs() < 1e-12);
        assert!(spectral_derivative(&f, &[2, 0]).unwrap().max_abs() > 1.0);
    }

    #[test]
    fn seminorm_scales_with_frequency() {
        let g = g1(64, 8.0);
        let step = std::f64::consts::PI / 8.0;
        let wave = |k: f64| sample(move |z: &[f64]| Complex::new((k * z[0]).sin() * (-z[1] * z[1] / 8.0).exp(), 0.0), g);
        let spec = SeminormSpec { p: 2.0, orders_x: vec![1], orders_p: vec![0] };
        let base = seminorm(&wave(4.0 * step), &spec).unwrap();
        let high = seminorm(&wave(16.0 * step), &spec).unwrap();
        let l2 = lp_norm(&wave(4.0 * step), 2.0).unwrap();
        assert!((base / l2 - 4.0 * step).abs() < 1e-6, "{}", base / l2);
        assert!((high / base - 4.0).abs() < 1e-6);
    }

    #[test]
    fn sobolev_monotone_and_flat_image() {
        let g = g1(32, 5.0);
        let a = random_symbol(11, 0.6, 1.0, g).unwrap();
        let v: Vec<f64> = [0.0, 0.5, 1.0, 2.0].iter().map(|&s| sobolev_norm(&a, s, 2.0).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        // direct quadrature of the transform-domain expression for p = 2
        let spec = plain_forward(&a);
        let steps = axis_freq_spacing(&a);
        let mut total = 0.0;
        for (idx, z) in spec.iter().enumerate() {
            let k = frequencies(&a, &unravel(idx, 32, 2), &steps);
            total += z.norm_sqr() * japanese(&k).powf(2.0);
        }
        let parseval = (total / (32.0 * 32.0) / (a.weight() * a.weight()) * a.weight()).sqrt();
        assert!((parseval - v[2]).abs() < 1e-10 * v[2], "{parseval} {}", v[2]);
    }

    #[test]
    fn smoothing_inverse_and_translation() {
        let g = g1(32, 6.0);
        let a = random_symbol(2, 0.4, 1.0, g).unwrap();
        assert_eq!(bessel_smooth(&a, &[0.0], &[0.0]).unwrap(), a);
        let b = bessel_smooth(&a, &[0.6], &[0.8]).unwrap();
        let cg = cordes_symbol(&[1.2], &[1.6], g, &[1]).unwrap();
        let back = convolve(&b, &cg).unwrap();
        assert!(back.max_abs_diff(&a).unwrap() < 1e-8);
        let shifted = bessel_smooth(&roll(&a, &[3, -5]), &[0.6], &[0.8]).unwrap();
        assert!(shifted.max_abs_diff(&roll(&b, &[3, -5])).unwrap() < 1e-10);
    }

    #[test]
    fn random_symbols_are_deterministic_and_band_limited() {
        let g = g1(32, 4.0);
        let a = random_symbol(42, 0.25, 2.0, g).unwrap();
        assert_eq!(a, random_symbol(42, 0.25, 2.0, g).unwrap());
        assert_ne!(a, random_symbol(43, 0.25, 2.0, g).unwrap());
        assert!(a.values.iter().all(|z| z.im == 0.0));
        assert!((a.max_abs() - 1.0).abs() < 1e-15);
        let spec = random_symbol_spectrum(42, 0.25, 2.0, g).unwrap();
        let fa = plain_forward(&a);
        for (idx, z) in spec.iter().enumerate() {
            let inside = unravel(idx, 32, 2).iter().all(|&d| (d as f64 - 16.0).abs() < 4.0);
            if !inside {
                assert_eq!(*z, Complex::new(0.0, 0.0));
                assert!(fa[idx].norm() < 1e-12);
            }
        }
        assert!(random_symbol(1, 0.0, 1.0, g).is_err());
        assert!(random_symbol(1, 1.5, 1.0, g).is_err());
    }

    #[test]
    fn decay_lowers_derivative_ratio() {
        let g = g1(32, 4.0);
        let spec = SeminormSpec::uniform(2.0, 1, 1);
        let ratio = |seed, decay| {
            let a = random_symbol(seed, 0.8, decay, g).unwrap();
            seminorm(&a, &spec).unwrap() / lp_norm(&a, 2.0).unwrap()
        };
        for seed in 0..10 {
            assert!(ratio(seed, 4.0) < ratio(seed, 2.0));
        }
    }

    #[test]
    fn block_caps() {
        let layout = [(0, 2), (2, 2)];
        let idx = multi_indices(&layout, &[1, 2], 4);
        assert_eq!(idx.len(), 3 * 6);
        assert!(idx.iter().all(|a| a[0] + a[1] <= 1 && a[2] + a[3] <= 2));
        assert_eq!(SeminormSpec::for_tau(1.0, &[1, 3], 0.5).orders_x, vec![2, 4]);
        assert_eq!(SeminormSpec::for_tau(1.0, &[1, 3], 0.0).orders_p, vec![1, 2]);
    }

    #[test]
    fn manifest_roundtrip_and_resample() {
        let g = g1(16, 3.0);
        let m = SymbolManifest::new(7, 0.5, 1.5, g);
        let json = serde_json::to_string(&m).unwrap();
        let back: SymbolManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back.realize::<f64>().unwrap(), random_symbol(7, 0.5, 1.5, g).unwrap());
        assert!(serde_json::from_str::<SymbolManifest>(r#"{"seed":1,"band_fraction":0.5,"envelope_decay":1,"grid":{"dim":1,"samples_per_axis":8,"half_width":1},"extra":0}"#).is_err());

        let a = m.realize::<f64>().unwrap();
        let r = resample(&a, 32).unwrap();
        for i in 0..16 {
            for k in 0..32 {
                let want = a.values[i * 16 + g.wrap(k as i64 - 16)];
                assert!((r.values[2 * i * 32 + k] - want).norm() < 1e-12);
            }
        }
        let smooth = sample_real(|z: &[f64]| (std::f64::consts::PI / 3.0 * 2.0 * z[0]).cos(), g, SpaceTag::phase(1)).unwrap();
        let fine = resample(&smooth, 64).unwrap();
        for (idx, z) in fine.values.iter().enumerate() {
            let x = fine.point(idx)[0];
            assert!((z.re - (std::f64::consts::PI / 3.0 * 2.0 * x).cos()).abs() < 1e-12);
        }
        assert!(resample(&a, 8).is_err());
    }
}
