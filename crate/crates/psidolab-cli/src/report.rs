use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, Suite};
use crate::error::CliError;

pub const VERSION: &str = concat!("psidolab ", env!("CARGO_PKG_VERSION"));

/// A thresholded measurement; `value` must not exceed `threshold`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A recorded trend that never fails a run.
#[derive(Debug, Clone, Serialize)]
pub struct Advisory {
    pub name: String,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub advisories: Vec<Advisory>,
    pub tables: Vec<String>,
    #[serde(skip)]
    pub pending: Vec<Table>,
}

impl SuiteReport {
    pub fn new(suite: Suite) -> Self {
        Self { suite, checks: Vec::new(), advisories: Vec::new(), tables: Vec::new(), pending: Vec::new() }
    }

    /// Records `value <= threshold`; a library error fails the check.
    pub fn check(&mut self, name: &str, threshold: f64, value: psidolab::Result<f64>) {
        let (value, error) = match value {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        self.checks.push(Check { name: name.into(), value, threshold, passed: value <= threshold, error });
    }

    pub fn advise(&mut self, name: &str, value: f64, holds: bool) {
        self.advisories.push(Advisory { name: name.into(), value, holds });
    }

    pub fn table(&mut self, table: Table) {
        self.pending.push(table);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub version: &'static str,
    pub passed: bool,
    pub config: &'a ExperimentConfig,
    pub suites: Vec<SuiteReport>,
}

#[derive(Debug, Serialize)]
struct FailureManifest<'a> {
    version: &'static str,
    failures: Vec<(&'a str, &'a Check)>,
}

fn file_stem(cfg: &ExperimentConfig, suite: Suite, table: &str) -> String {
    let seeds = match (cfg.seeds.first(), cfg.seeds.last()) {
        (Some(a), Some(b)) if a == b => format!("s{a}"),
        (Some(a), Some(b)) => format!("s{a}-{b}"),
        _ => "s-none".into(),
    };
    let g = &cfg.grid;
    format!("{suite}_{table}_d{}_n{}_l{}_{seeds}", g.dim, g.samples_per_axis, g.half_width)
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut file = create(path)?;
    writeln!(file, "# {VERSION}").map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Writes every table, the summary and, on failure, the failure manifest.
pub fn emit(cfg: &ExperimentConfig, mut suites: Vec<SuiteReport>) -> Result<bool, CliError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    for report in &mut suites {
        for table in std::mem::take(&mut report.pending) {
            let name = format!("{}.csv", file_stem(cfg, report.suite, table.name));
            write_csv(&dir.join(&name), &table)?;
            report.tables.push(name);
        }
    }
    let passed = suites.iter().all(SuiteReport::passed);
    let failures_path: PathBuf = dir.join("failures.json");
    if passed {
        if failures_path.exists() {
            fs::remove_file(&failures_path).map_err(|e| CliError::Io(failures_path.clone(), e))?;
        }
    } else {
        let failures = suites
            .iter()
            .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| (s.suite.name(), c)))
            .collect();
        write_json(&failures_path, &FailureManifest { version: VERSION, failures })?;
    }
    write_json(&dir.join("summary.json"), &Summary { version: VERSION, passed, config: cfg, suites })?;
    Ok(passed)
}
