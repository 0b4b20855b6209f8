mod config;
mod error;
mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use psidolab::quantize::{kernel_from_symbol, QuantizationParams};
use psidolab::symclass::{SymbolManifest, GENERATOR};
use psidolab::Sampled;

use config::{ExperimentConfig, Suite};
use error::CliError;
use report::{Table, VERSION};

#[derive(Debug, Parser)]
#[command(name = "psidolab", version, about = "Run tau-quantization experiments on periodic phase-space grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the suites named in a JSON config and write reports to its output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the suite catalog.
    List,
    /// Quantize a manifest symbol and write the kernel as CSV.
    Quantize {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(path: &Path) -> Result<bool, CliError> {
    let cfg = ExperimentConfig::load(path)?;
    let reports = Suite::expand(&cfg.suites).into_iter().map(|s| suites::run(s, &cfg)).collect::<Vec<_>>();
    for r in &reports {
        for c in &r.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            println!("{status} {}/{}: {:e} (threshold {:e})", r.suite, c.name, c.value, c.threshold);
        }
    }
    report::emit(&cfg, reports)
}

fn list() {
    for suite in Suite::CATALOG {
        println!("{:<11} {}", suite.name(), suite.exercises());
    }
}

fn load_manifest(path: &Path) -> Result<SymbolManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Config { key: e.path().to_string(), message: e.inner().to_string() })
}

fn quantize(symbol: &Path, tau: f64, out: &Path) -> Result<(), CliError> {
    if !tau.is_finite() {
        return Err(CliError::Config { key: "tau".into(), message: format!("must be finite, got {tau}") });
    }
    let manifest = load_manifest(symbol)?;
    if manifest.generator != GENERATOR {
        return Err(CliError::Config { key: "generator".into(), message: format!("expected {GENERATOR:?}, got {:?}", manifest.generator) });
    }
    let a: Sampled = manifest.realize().map_err(|e| CliError::Config { key: "grid".into(), message: e.to_string() })?;
    let k = kernel_from_symbol(&a, &QuantizationParams::new(tau, a.grid))?;
    let m = a.grid.samples_per_axis().pow(a.grid.dim() as u32);
    let mut table = Table::new("kernel", &["row", "col", "re", "im"]);
    for (idx, z) in k.values.iter().enumerate() {
        table.push(vec![(idx / m).to_string(), (idx % m).to_string(), format!("{:e}", z.re), format!("{:e}", z.im)]);
    }
    report::write_csv(out, &table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config } => run(&config),
        Command::List => {
            list();
            Ok(true)
        }
        Command::Quantize { symbol, tau, out } => quantize(&symbol, tau, &out).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{VERSION}: threshold failures recorded in failures.json");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
