use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Weyl,
    Quantize,
    Kato,
    Schatten,
    Bessel,
    Multiplier,
    All,
}

impl Suite {
    pub const CATALOG: [Suite; 7] =
        [Suite::Weyl, Suite::Quantize, Suite::Kato, Suite::Schatten, Suite::Bessel, Suite::Multiplier, Suite::All];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Weyl => "weyl",
            Suite::Quantize => "quantize",
            Suite::Kato => "kato",
            Suite::Schatten => "schatten",
            Suite::Bessel => "bessel",
            Suite::Multiplier => "multiplier",
            Suite::All => "all",
        }
    }

    pub fn exercises(self) -> &'static str {
        match self {
            Suite::Weyl => "Weyl operator composition law, symplectic Fourier transform, phase-space Parseval identity",
            Suite::Quantize => "tau-quantization roundtrip, tau conversion of symbols, Hilbert-Schmidt isometry",
            Suite::Kato => "Kato operator averages of trace-class seeds, synthesis of Op(b*g), polar dominance",
            Suite::Schatten => "Schatten-class bounds by symbol seminorms, tau continuity of Schatten norms",
            Suite::Bessel => "Bessel potential kernels, trace norms of Cordes-type separable symbols",
            Suite::Multiplier => "dyadic decomposition of mixed-homogeneous multipliers, L1 kernel bounds",
            Suite::All => "every suite above, in catalog order",
        }
    }

    pub fn expand(suites: &[Suite]) -> Vec<Suite> {
        let mut out: Vec<Suite> = if suites.contains(&Suite::All) {
            Suite::CATALOG[..6].to_vec()
        } else {
            suites.to_vec()
        };
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A Schatten exponent; JSON uses a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(Infinity),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf")]
    Inf,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Named(Infinity::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub samples_per_axis: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, samples_per_axis: 64, half_width: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiplierConfig {
    pub samples_per_axis: usize,
    pub half_width: f64,
    pub nodes: usize,
    pub epsilon: f64,
    pub family_size: usize,
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        Self { samples_per_axis: 32, half_width: 8.0, nodes: 64, epsilon: 0.5, family_size: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub composition: f64,
    pub fourier: f64,
    pub parseval: f64,
    pub roundtrip: f64,
    pub conversion: f64,
    pub hilbert_schmidt: f64,
    pub unit_average: f64,
    pub positivity: f64,
    pub synthesis: f64,
    pub dominance: f64,
    pub hs_bound: f64,
    pub bessel_mass: f64,
    pub exponential_pair: f64,
    pub trace_drift: f64,
    pub partition: f64,
    pub factorization: f64,
    pub probe_slack: f64,
    pub probe_l2: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            composition: 1e-12,
            fourier: 1e-12,
            parseval: 1e-2,
            roundtrip: 1e-10,
            conversion: 1e-8,
            hilbert_schmidt: 1e-6,
            unit_average: 5e-2,
            positivity: 1e-10,
            synthesis: 5e-2,
            dominance: 1e-12,
            hs_bound: 1e-6,
            bessel_mass: 1e-8,
            exponential_pair: 1e-3,
            trace_drift: 0.1,
            partition: 1e-3,
            factorization: 1e-8,
            probe_slack: 1e-3,
            probe_l2: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suites: Vec<Suite>,
    pub grid: GridConfig,
    pub taus: Vec<f64>,
    pub ps: Vec<Exponent>,
    pub seeds: Vec<u64>,
    pub refinement: Vec<usize>,
    pub multiplier: MultiplierConfig,
    pub thresholds: Thresholds,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suites: vec![Suite::All],
            grid: GridConfig::default(),
            taus: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            ps: vec![Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Finite(4.0), Exponent::Named(Infinity::Inf)],
            seeds: vec![0, 1, 2],
            refinement: vec![32, 48, 64],
            multiplier: MultiplierConfig::default(),
            thresholds: Thresholds::default(),
            output_dir: PathBuf::from("psidolab-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            key: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, message: String| Err(CliError::Config { key: key.into(), message });
        if self.grid.dim == 0 {
            return bad("grid.dim", "must be at least 1".into());
        }
        if self.grid.samples_per_axis < 4 || self.grid.samples_per_axis % 2 != 0 {
            return bad("grid.samples_per_axis", format!("must be even and at least 4, got {}", self.grid.samples_per_axis));
        }
        if !(self.grid.half_width > 0.0 && self.grid.half_width.is_finite()) {
            return bad("grid.half_width", format!("must be positive, got {}", self.grid.half_width));
        }
        if let Some(t) = self.taus.iter().find(|t| !t.is_finite()) {
            return bad("taus", format!("must be finite, got {t}"));
        }
        if let Some(p) = self.ps.iter().find(|p| !(p.value() >= 1.0)) {
            return bad("ps", format!("exponents must be at least 1, got {:?}", p));
        }
        if let Some(n) = self.refinement.iter().find(|&&n| n < 4 || n % 2 != 0) {
            return bad("refinement", format!("sample counts must be even and at least 4, got {n}"));
        }
        let m = &self.multiplier;
        if m.samples_per_axis < 8 || m.samples_per_axis % 2 != 0 {
            return bad("multiplier.samples_per_axis", format!("must be even and at least 8, got {}", m.samples_per_axis));
        }
        if m.nodes < 6 {
            return bad("multiplier.nodes", format!("must be at least 6, got {}", m.nodes));
        }
        if !(m.epsilon > 0.0) {
            return bad("multiplier.epsilon", format!("must be positive, got {}", m.epsilon));
        }
        Ok(())
    }
}
