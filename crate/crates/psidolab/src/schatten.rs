//! Singular values, Schatten norms and empirical bound records.

use serde::{Deserialize, Serialize};

use crate::error::{PsidoError, Result};
use crate::grid::{lp_norm, GridJson, GridSpec, SampledFunction};
use crate::quantize::{kernel_from_symbol, OperatorKernel, QuantizationParams};
use crate::scalar::{pairwise_sum, Real};
use crate::symclass::{bessel_smooth, seminorm, sobolev_norm, SeminormSpec};

/// Singular values of the weighted matrix `hⁿK`, descending.
pub fn singular_values<T: Real>(k: &OperatorKernel<T>) -> Result<Vec<T>> {
    if k.values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(PsidoError::Numerical("kernel has non-finite entries".into()));
    }
    T::singular_values(&k.matrix(), k.dim()).ok_or_else(|| PsidoError::Numerical("SVD did not converge".into()))
}

/// `(Σ σᵢ^p)^{1/p}`, or `max σᵢ` for `p = ∞`, from precomputed singular values.
pub fn norm_from_singular_values<T: Real>(sv: &[T], p: T) -> Result<T> {
    if p.is_nan() || p < T::one() {
        return Err(PsidoError::Domain(format!("p must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(sv.iter().fold(T::zero(), |m, &s| m.max(s)));
    }
    let terms: Vec<T> = sv.iter().map(|&s| s.powf(p)).collect();
    Ok(pairwise_sum(&terms, T::zero()).powf(T::one() / p))
}

pub fn schatten_norm<T: Real>(k: &OperatorKernel<T>, p: T) -> Result<T> {
    if p.is_nan() || p < T::one() {
        return Err(PsidoError::Domain(format!("p must be >= 1, got {p}")));
    }
    norm_from_singular_values(&singular_values(k)?, p)
}

/// Operator norm (largest singular value).
pub fn operator_norm<T: Real>(k: &OperatorKernel<T>) -> Result<T> {
    schatten_norm(k, T::infinity())
}

/// Singular values plus the requested Schatten norms of one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub singular_values: Vec<f64>,
    /// `(p, ‖K‖_p)` pairs; `p = ∞` is serialized as `null` by JSON.
    pub norms: Vec<(f64, f64)>,
    pub grid: GridJson,
    pub symbol_id: String,
    pub tau: f64,
}

impl SchattenReport {
    pub fn new<T: Real>(k: &OperatorKernel<T>, ps: &[T], symbol_id: &str, tau: T) -> Result<Self> {
        let sv = singular_values(k)?;
        let norms = ps
            .iter()
            .map(|&p| Ok((p.to_f64_lossy(), norm_from_singular_values(&sv, p)?.to_f64_lossy())))
            .collect::<Result<Vec<_>>>()?;
        Ok(SchattenReport {
            singular_values: sv.iter().map(|s| s.to_f64_lossy()).collect(),
            norms,
            grid: k.grid.into(),
            symbol_id: symbol_id.into(),
            tau: tau.to_f64_lossy(),
        })
    }
}

/// Hypothesis quantity bounding the Schatten norm of a quantized symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis<T> {
    /// Derivative seminorm `|a|_{p,m}`; the `p` of the seminorm is taken from the report.
    Seminorm { orders_x: Vec<u32>, orders_p: Vec<u32> },
    /// Sobolev norm `‖⟨D⟩^s a‖_{L^p}` on phase space.
    Sobolev { s: T },
    /// `‖b‖_{L^p}` with `b` the block Bessel smoothing of `a`.
    Smoothed { t: Vec<T>, s: Vec<T> },
}

impl<T: Real> Hypothesis<T> {
    /// Derivative caps `⌊n_j/2⌋ + 1` per block, doubled when `τ ≠ 0`.
    pub fn seminorm_default(blocks: &[usize], tau: T) -> Self {
        let spec = SeminormSpec::for_tau(T::one(), blocks, tau);
        Hypothesis::Seminorm { orders_x: spec.orders_x, orders_p: spec.orders_p }
    }

    /// Sobolev order `μ·n·|1 − 2/p|` from the interpolation estimate.
    pub fn interpolation(mu: T, dim: usize, p: T) -> Self {
        let e = if p.is_infinite() { T::one() } else { (T::one() - T::of(2.0) / p).abs() };
        Hypothesis::Sobolev { s: mu * T::of_usize(dim) * e }
    }

    /// Smoothing exponents just above `n_j/4`, doubled when `τ ≠ 0`.
    pub fn smoothed_default(blocks: &[usize], tau: T) -> Self {
        let scale = if tau == T::zero() { T::one() } else { T::of(2.0) };
        let e: Vec<T> = blocks.iter().map(|&b| scale * (T::of_usize(b) / T::of(4.0) + T::of(0.05))).collect();
        Hypothesis::Smoothed { t: e.clone(), s: e }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Hypothesis::Seminorm { .. } => "seminorm",
            Hypothesis::Sobolev { .. } => "sobolev",
            Hypothesis::Smoothed { .. } => "smoothed",
        }
    }

    pub fn evaluate(&self, a: &SampledFunction<T>, p: T) -> Result<T> {
        match self {
            Hypothesis::Seminorm { orders_x, orders_p } => {
                seminorm(a, &SeminormSpec { p, orders_x: orders_x.clone(), orders_p: orders_p.clone() })
            }
            Hypothesis::Sobolev { s } => sobolev_norm(a, *s, p),
            Hypothesis::Smoothed { t, s } => lp_norm(&bessel_smooth(a, t, s)?, p),
        }
    }
}

/// One row of an empirical bound table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub symbol_id: String,
    pub tau: f64,
    pub p: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub grid: GridJson,
    pub hypothesis: String,
    /// `rhs = 0` while `lhs > 0`.
    pub violation: bool,
}

/// Compares `‖Op_τ(a)‖_p` with the hypothesis norm of `a`.
pub fn bound_report<T: Real>(
    a: &SampledFunction<T>,
    tau: T,
    p: T,
    hypothesis: &Hypothesis<T>,
    symbol_id: &str,
) -> Result<BoundRecord> {
    let k = kernel_from_symbol(a, &QuantizationParams::new(tau, a.grid))?;
    let lhs = schatten_norm(&k, p)?;
    let rhs = hypothesis.evaluate(a, p)?;
    bound_record(lhs, rhs, a.grid, tau, p, hypothesis.name(), symbol_id)
}

pub(crate) fn bound_record<T: Real>(
    lhs: T,
    rhs: T,
    grid: GridSpec<T>,
    tau: T,
    p: T,
    hypothesis: &str,
    symbol_id: &str,
) -> Result<BoundRecord> {
    let tiny = T::of(T::TOL);
    let violation = rhs == T::zero() && lhs > tiny;
    let ratio = if rhs == T::zero() { T::zero() } else { lhs / rhs };
    Ok(BoundRecord {
        symbol_id: symbol_id.into(),
        tau: tau.to_f64_lossy(),
        p: p.is_finite().then(|| p.to_f64_lossy()),
        lhs: lhs.to_f64_lossy(),
        rhs: rhs.to_f64_lossy(),
        ratio: ratio.to_f64_lossy(),
        grid: grid.into(),
        hypothesis: hypothesis.into(),
        violation,
    })
}

/// `‖Op_τ(a) − Op_τ'(a)‖_p` for one adjacent pair of the `τ` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauDefect {
    pub tau_a: f64,
    pub tau_b: f64,
    pub defect: f64,
}

pub fn tau_continuity_report<T: Real>(a: &SampledFunction<T>, taus: &[T], p: T) -> Result<Vec<TauDefect>> {
    if taus.len() < 2 {
        return Err(PsidoError::Domain("need at least two tau values".into()));
    }
    let kernels = taus
        .iter()
        .map(|&t| kernel_from_symbol(a, &QuantizationParams::new(t, a.grid)))
        .collect::<Result<Vec<_>>>()?;
    taus.windows(2)
        .zip(kernels.windows(2))
        .map(|(t, k)| {
            Ok(TauDefect {
                tau_a: t[0].to_f64_lossy(),
                tau_b: t[1].to_f64_lossy(),
                defect: schatten_norm(&k[0].sub(&k[1])?, p)?.to_f64_lossy(),
            })
        })
        .collect()
}
