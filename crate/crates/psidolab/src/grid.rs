//! Uniform periodic lattices on `X = ℝⁿ`, its dual `X*`, and phase space.
//!
//! Lattice points sit at `−L + j·h`, `j = 0..N`, so the origin is the point
//! `j = N/2`. Values are stored row-major; on phase space the `n` position
//! axes come before the `n` frequency axes.
//!
//! Quadrature weights carry the `(2π)^{−n}` dual-measure factor on frequency
//! axes: `hⁿ` on `X`, `(h*/2π)ⁿ` on `X*` and `(h·h*/2π)ⁿ = N^{−n}` on phase
//! space, where `h* = π/L` is the dual spacing.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{PsidoError, Result};
use crate::scalar::{pairwise_sum, Real};

/// Parameters of a periodic lattice with `N` points per axis on `[−L, L)ⁿ`.
///
/// The dual of a grid is stored symbolically, so `g.dual().dual() == g`
/// holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridJson", into = "GridJson", bound = "T: Real")]
pub struct GridSpec<T> {
    dim: usize,
    samples_per_axis: usize,
    base_half_width: T,
    reciprocal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridJson {
    pub dim: usize,
    pub samples_per_axis: usize,
    pub half_width: f64,
}

impl<T: Real> TryFrom<GridJson> for GridSpec<T> {
    type Error = PsidoError;
    fn try_from(g: GridJson) -> Result<Self> {
        GridSpec::new(g.dim, g.samples_per_axis, T::of(g.half_width))
    }
}

impl<T: Real> From<GridSpec<T>> for GridJson {
    fn from(g: GridSpec<T>) -> Self {
        GridJson { dim: g.dim, samples_per_axis: g.samples_per_axis, half_width: g.half_width().to_f64_lossy() }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn new(dim: usize, samples_per_axis: usize, half_width: T) -> Result<Self> {
        if dim == 0 {
            return Err(PsidoError::InvalidGrid("dim must be positive".into()));
        }
        if samples_per_axis < 4 || samples_per_axis % 2 != 0 {
            return Err(PsidoError::InvalidGrid(format!(
                "samples_per_axis must be even and >= 4, got {samples_per_axis}"
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(PsidoError::InvalidGrid(format!("half_width must be positive, got {half_width}")));
        }
        Ok(GridSpec { dim, samples_per_axis, base_half_width: half_width, reciprocal: false })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn half_width(&self) -> T {
        if self.reciprocal {
            T::of_usize(self.samples_per_axis) * T::PI() / (T::of(2.0) * self.base_half_width)
        } else {
            self.base_half_width
        }
    }

    /// Lattice spacing `h = 2L/N`.
    pub fn spacing(&self) -> T {
        T::of(2.0) * self.half_width() / T::of_usize(self.samples_per_axis)
    }

    /// The reciprocal lattice: spacing `π/L`, half-width `Nπ/(2L)`.
    pub fn dual(&self) -> Self {
        GridSpec { reciprocal: !self.reciprocal, ..*self }
    }

    /// Coordinate of lattice index `j` along one axis.
    pub fn coord(&self, j: usize) -> T {
        T::of(j as f64 - (self.samples_per_axis / 2) as f64) * self.spacing()
    }

    /// Centered integer label `j − N/2` of lattice index `j`.
    pub fn centered(&self, j: usize) -> i64 {
        j as i64 - (self.samples_per_axis / 2) as i64
    }

    /// Lattice index of a centered label, wrapping periodically.
    pub fn wrap(&self, c: i64) -> usize {
        let n = self.samples_per_axis as i64;
        (c + n / 2).rem_euclid(n) as usize
    }

    /// Number of lattice points of a function carrying `tag`.
    pub fn len(&self, tag: &SpaceTag) -> usize {
        self.samples_per_axis.pow(tag.axes(self.dim) as u32)
    }

    /// Quadrature weight per lattice point for a function on this grid with `tag`.
    pub fn weight(&self, tag: &SpaceTag) -> T {
        let two_pi = T::of(2.0) * T::PI();
        let per_axis = match tag {
            SpaceTag::X => self.spacing(),
            SpaceTag::Xstar => self.spacing() / two_pi,
            SpaceTag::Phase { .. } => self.spacing() * self.dual().spacing() / two_pi,
        };
        per_axis.powi(self.dim as i32)
    }

    /// Coordinates of flat index `idx` (x first, then p on phase space).
    pub fn point(&self, tag: &SpaceTag, idx: usize) -> Vec<T> {
        let axes = tag.axes(self.dim);
        let digits = unravel(idx, self.samples_per_axis, axes);
        let dual = self.dual();
        digits
            .iter()
            .enumerate()
            .map(|(a, &j)| match tag {
                SpaceTag::Phase { .. } if a >= self.dim => dual.coord(j),
                _ => self.coord(j),
            })
            .collect()
    }
}

/// Which space a sampled function lives on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    X,
    Xstar,
    /// Phase space with an orthogonal block decomposition of `X`.
    Phase { blocks: Vec<usize> },
}

impl SpaceTag {
    /// Phase space with the trivial decomposition `X = X`.
    pub fn phase(dim: usize) -> Self {
        SpaceTag::Phase { blocks: vec![dim] }
    }

    pub fn phase_blocks(blocks: Vec<usize>, dim: usize) -> Result<Self> {
        if blocks.iter().any(|&b| b == 0) || blocks.iter().sum::<usize>() != dim {
            return Err(PsidoError::Shape(format!("block dimensions {blocks:?} do not partition dim {dim}")));
        }
        Ok(SpaceTag::Phase { blocks })
    }

    pub fn axes(&self, dim: usize) -> usize {
        match self {
            SpaceTag::Phase { .. } => 2 * dim,
            _ => dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpaceTag::X => "X",
            SpaceTag::Xstar => "Xstar",
            SpaceTag::Phase { .. } => "Phase",
        }
    }

    pub fn blocks(&self, dim: usize) -> Vec<usize> {
        match self {
            SpaceTag::Phase { blocks } => blocks.clone(),
            _ => vec![dim],
        }
    }
}

/// Row-major digits of `idx` in base `n` with `axes` digits.
pub fn unravel(mut idx: usize, n: usize, axes: usize) -> Vec<usize> {
    let mut out = vec![0; axes];
    for a in (0..axes).rev() {
        out[a] = idx % n;
        idx /= n;
    }
    out
}

pub fn ravel(digits: &[usize], n: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * n + d)
}

/// Complex samples of a function on a lattice.
///
/// On `Xstar` the grid is the frequency lattice itself (usually `x_grid.dual()`);
/// on `Phase` it is the position lattice and frequencies come from its dual.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    pub tag: SpaceTag,
    pub grid: GridSpec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SampledFunction<T> {
    pub fn from_values(tag: SpaceTag, grid: GridSpec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        let want = grid.len(&tag);
        if values.len() != want {
            return Err(PsidoError::Shape(format!("expected {want} values, got {}", values.len())));
        }
        if let Some(index) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            let coords = grid.point(&tag, index).iter().map(|c| c.to_f64_lossy()).collect();
            return Err(PsidoError::NonFinite { index, coords });
        }
        Ok(SampledFunction { tag, grid, values })
    }

    pub fn zeros(tag: SpaceTag, grid: GridSpec<T>) -> Self {
        let len = grid.len(&tag);
        SampledFunction { tag, grid, values: vec![Complex::new(T::zero(), T::zero()); len] }
    }

    /// Discrete delta at the origin, normalized to unit mass.
    pub fn delta(tag: SpaceTag, grid: GridSpec<T>) -> Self {
        let mut f = Self::zeros(tag, grid);
        let n = grid.samples_per_axis();
        let origin = ravel(&vec![n / 2; f.tag.axes(grid.dim())], n);
        f.values[origin] = Complex::new(T::one() / grid.weight(&f.tag), T::zero());
        f
    }

    pub fn weight(&self) -> T {
        self.grid.weight(&self.tag)
    }

    pub fn axes(&self) -> usize {
        self.tag.axes(self.grid.dim())
    }

    pub fn point(&self, idx: usize) -> Vec<T> {
        self.grid.point(&self.tag, idx)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        SampledFunction { values: self.values.iter().map(|&z| f(z)).collect(), ..self.clone() }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|z| z * c)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        same_space(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(SampledFunction { values, ..self.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        same_space(self, other)?;
        Ok(self.values.iter().zip(&other.values).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm())))
    }

    pub fn require(&self, expected: &'static str) -> Result<()> {
        if self.tag.name() == expected {
            Ok(())
        } else {
            Err(PsidoError::Tag { expected, found: self.tag.name().into() })
        }
    }
}

pub(crate) fn same_space<T: Real>(a: &SampledFunction<T>, b: &SampledFunction<T>) -> Result<()> {
    if a.grid != b.grid || a.tag != b.tag {
        return Err(PsidoError::Shape(format!(
            "functions live on different lattices ({} {:?} vs {} {:?})",
            a.tag.name(),
            a.grid,
            b.tag.name(),
            b.grid
        )));
    }
    Ok(())
}

/// Samples a complex evaluator at every lattice point.
pub fn sample<T: Real>(
    f: impl Fn(&[T]) -> Complex<T>,
    grid: GridSpec<T>,
    tag: SpaceTag,
) -> Result<SampledFunction<T>> {
    if let SpaceTag::Phase { blocks } = &tag {
        SpaceTag::phase_blocks(blocks.clone(), grid.dim())?;
    }
    let len = grid.len(&tag);
    let mut values = Vec::with_capacity(len);
    for idx in 0..len {
        let pt = grid.point(&tag, idx);
        let v = f(&pt);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(PsidoError::NonFinite { index: idx, coords: pt.iter().map(|c| c.to_f64_lossy()).collect() });
        }
        values.push(v);
    }
    Ok(SampledFunction { tag, grid, values })
}

/// Samples a real evaluator.
pub fn sample_real<T: Real>(f: impl Fn(&[T]) -> T, grid: GridSpec<T>, tag: SpaceTag) -> Result<SampledFunction<T>> {
    sample(|pt| Complex::new(f(pt), T::zero()), grid, tag)
}

/// Quadrature `L^p` norm; `p = ∞` gives the maximum modulus.
pub fn lp_norm<T: Real>(f: &SampledFunction<T>, p: T) -> Result<T> {
    if p.is_nan() || p < T::one() {
        return Err(PsidoError::Domain(format!("p must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let terms: Vec<T> = if p == T::one() {
        f.values.iter().map(|z| z.norm()).collect()
    } else if p == T::of(2.0) {
        f.values.iter().map(|z| z.norm_sqr()).collect()
    } else {
        f.values.iter().map(|z| z.norm().powf(p)).collect()
    };
    let s = pairwise_sum(&terms, T::zero()) * f.weight();
    Ok(s.powf(T::one() / p))
}

/// Weighted inner product, antilinear in the first argument.
pub fn inner<T: Real>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<Complex<T>> {
    same_space(f, g)?;
    let terms: Vec<Complex<T>> = f.values.iter().zip(&g.values).map(|(a, b)| a.conj() * b).collect();
    Ok(pairwise_sum(&terms, Complex::new(T::zero(), T::zero())) * f.weight())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(n: usize, l: f64) -> GridSpec<f64> {
        GridSpec::new(1, n, l).unwrap()
    }

    #[test]
    fn lattice_coordinates() {
        let f = sample_real(|x| x[0], g1(4, 1.0), SpaceTag::X).unwrap();
        let re: Vec<f64> = f.values.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![-1.0, -0.5, 0.0, 0.5]);
        let one = sample_real(|_| 1.0, g1(4, 1.0), SpaceTag::X).unwrap();
        assert!(one.values.iter().all(|z| z.re == 1.0));
        let zero = sample_real(|_| 0.0, g1(8, 3.0), SpaceTag::phase(1)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn dual_spacing_and_involution() {
        let g = g1(64, 8.0);
        let d = g.dual();
        assert!((d.spacing() - std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert!((d.half_width() - 64.0 * std::f64::consts::PI / 16.0).abs() < 1e-12);
        assert_eq!(d.dual(), g);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(1, 6, 1.0f64).is_ok());
        assert!(GridSpec::new(1, 5, 1.0f64).is_err());
        assert!(GridSpec::new(1, 2, 1.0f64).is_err());
        assert!(GridSpec::new(0, 8, 1.0f64).is_err());
        assert!(GridSpec::new(1, 8, -1.0f64).is_err());
    }

    #[test]
    fn non_finite_reports_point() {
        let err = sample_real(|x| 1.0 / x[0], g1(4, 1.0), SpaceTag::X).unwrap_err();
        match err {
            PsidoError::NonFinite { index, coords } => {
                assert_eq!(index, 2);
                assert_eq!(coords, vec![0.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_integral_and_sup() {
        let one = sample_real(|_| 1.0, g1(4, 1.0), SpaceTag::X).unwrap();
        assert!((lp_norm(&one, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let f = sample_real(|x| (x[0] * 3.0).sin(), g1(16, 1.0), SpaceTag::X).unwrap();
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), f.max_abs());
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn gaussian_l2_norm() {
        let f = sample_real(|x| (-x[0] * x[0]).exp(), g1(256, 10.0), SpaceTag::X).unwrap();
        let want = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((lp_norm(&f, 2.0).unwrap() - want).abs() < 1e-6);
    }

    #[test]
    fn inner_product_conventions() {
        let g = g1(16, 2.0);
        let f = sample(|x| Complex::new(x[0], x[0] * x[0]), g, SpaceTag::X).unwrap();
        let h = sample(|x| Complex::new(1.0, -x[0]).exp(), g, SpaceTag::X).unwrap();
        let ff = inner(&f, &f).unwrap();
        assert!((ff.re - lp_norm(&f, 2.0).unwrap().powi(2)).abs() < 1e-12 && ff.im.abs() < 1e-14);
        let (a, b) = (inner(&f, &h).unwrap(), inner(&h, &f).unwrap());
        assert!((a - b.conj()).norm() < 1e-12);
        let mut u = SampledFunction::zeros(SpaceTag::X, g);
        let mut v = SampledFunction::zeros(SpaceTag::X, g);
        u.values[3] = Complex::new(1.0, 0.0);
        v.values[4] = Complex::new(1.0, 0.0);
        assert_eq!(inner(&u, &v).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn weights_multiply_to_inverse_count() {
        let g = GridSpec::new(2, 16, 3.0f64).unwrap();
        let w = g.weight(&SpaceTag::phase(2));
        assert!((w - 1.0 / 256.0).abs() < 1e-15);
        let wx = g.weight(&SpaceTag::X);
        let wp = g.dual().weight(&SpaceTag::Xstar);
        assert!((wx * wp - w).abs() < 1e-15);
    }

    #[test]
    fn json_roundtrip() {
        let g = GridSpec::new(1, 32, 4.0f64).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"dim":1,"samples_per_axis":32,"half_width":4.0}"#);
        let back: GridSpec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GridSpec<f64>>(r#"{"dim":1,"samples_per_axis":3,"half_width":4.0}"#).is_err());
    }
}
