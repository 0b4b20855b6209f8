//! Floating-point scalar abstraction.
//!
//! Everything numeric in the crate is generic over [`Real`], implemented for
//! `f32` and `f64`. Dense linear algebra (SVD, Hermitian eigenvalues) is
//! dispatched through the trait so that generic code never has to carry
//! `nalgebra` bounds, which collide with `num_traits::Float` method names.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Result of a complex singular value decomposition `M = U Σ V*`.
///
/// Matrices are stored row-major, `dim x dim`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub dim: usize,
    pub u: Vec<Complex<T>>,
    pub sigma: Vec<T>,
    pub v_adjoint: Vec<Complex<T>>,
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f32 {}
    impl Sealed for f64 {}
}

/// Real floating-point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + sealed::Sealed
    + 'static
{
    /// Machine epsilon scaled into a practical comparison tolerance.
    const TOL: f64;

    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 constant")
    }

    /// Lossy conversion from an index or count.
    fn of_usize(k: usize) -> Self {
        <Self as FromPrimitive>::from_usize(k).expect("index fits float")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Singular values in descending order of a square row-major matrix.
    fn singular_values(m: &[Complex<Self>], dim: usize) -> Option<Vec<Self>>;

    /// Full SVD of a square row-major matrix, singular values descending.
    fn svd(m: &[Complex<Self>], dim: usize) -> Option<Svd<Self>>;

    /// Eigenvalues (ascending) of the Hermitian part of a square matrix.
    fn hermitian_eigenvalues(m: &[Complex<Self>], dim: usize) -> Vec<Self>;
}

macro_rules! impl_real {
    ($t:ty, $tol:expr) => {
        impl Real for $t {
            const TOL: f64 = $tol;

            fn singular_values(m: &[Complex<Self>], dim: usize) -> Option<Vec<Self>> {
                let mat = DMatrix::from_row_slice(dim, dim, m);
                let mut sv: Vec<$t> = mat.try_svd(false, false, <$t>::EPSILON, 0)?.singular_values.iter().copied().collect();
                sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
                Some(sv)
            }

            fn svd(m: &[Complex<Self>], dim: usize) -> Option<Svd<Self>> {
                let mat = DMatrix::from_row_slice(dim, dim, m);
                let dec = mat.try_svd(true, true, <$t>::EPSILON, 0)?;
                let (u, vt) = (dec.u?, dec.v_t?);
                let mut order: Vec<usize> = (0..dim).collect();
                order.sort_by(|&a, &b| {
                    dec.singular_values[b]
                        .partial_cmp(&dec.singular_values[a])
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                let mut out = Svd {
                    dim,
                    u: vec![Complex::new(0.0, 0.0); dim * dim],
                    sigma: order.iter().map(|&k| dec.singular_values[k]).collect(),
                    v_adjoint: vec![Complex::new(0.0, 0.0); dim * dim],
                };
                for (new, &old) in order.iter().enumerate() {
                    for r in 0..dim {
                        out.u[r * dim + new] = u[(r, old)];
                        out.v_adjoint[new * dim + r] = vt[(old, r)];
                    }
                }
                Some(out)
            }

            fn hermitian_eigenvalues(m: &[Complex<Self>], dim: usize) -> Vec<Self> {
                let mat = DMatrix::from_row_slice(dim, dim, m);
                let herm = (&mat + mat.adjoint()).map(|z| z * 0.5);
                let mut ev: Vec<$t> = herm.symmetric_eigenvalues().iter().copied().collect();
                ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                ev
            }
        }
    };
}

impl_real!(f32, 1e-5);
impl_real!(f64, 1e-12);

/// `⟨ζ⟩ = (1 + |ζ|²)^{1/2}`.
pub fn japanese<T: Real>(z: &[T]) -> T {
    let s = z.iter().fold(T::one(), |acc, &v| acc + v * v);
    s.sqrt()
}

/// Pairwise (tree) summation with a fixed association order.
pub fn pairwise_sum<T: Copy + std::ops::Add<Output = T>>(xs: &[T], zero: T) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().fold(zero, |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid], zero) + pairwise_sum(&xs[mid..], zero)
}
