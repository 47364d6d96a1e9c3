//! Command-line driver for `dipolar-spin-core`: reads a JSON experiment
//! config, runs it and writes a CSV table with a JSON provenance sidecar.

pub mod config;
pub mod error;
pub mod experiments;
pub mod regress;
pub mod table;
pub mod units;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::config::{ExperimentConfig, ExperimentKind, Params};
use crate::error::CliError;
use crate::experiments::RunOptions;
use crate::table::Sidecar;

#[derive(Debug, Parser)]
#[command(name = "dipolar-spin-sim", version, about = "Spin models in self-assembled dipolar crystals")]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum, required_unless_present = "units")]
    pub kind: Option<ExperimentKind>,
    /// JSON config; every key is optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV; the sidecar goes next to it with a .json extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Allow drives arbitrarily close to a phonon mode (exact poles still fail).
    #[arg(long)]
    pub override_resonance_guard: bool,
    /// Print unit conversions and exit.
    #[arg(long)]
    pub units: bool,
    /// D/(2 pi hbar a^3) in kHz for the --units example.
    #[arg(long, default_value_t = 100.0)]
    pub dipolar_khz: f64,
    /// Modulation depth for the --units example.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

/// Reads, resolves and runs; the returned value is the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.units {
        print!("{}", units::units_text(cli.dipolar_khz, cli.epsilon));
        return 0;
    }
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Config for `cli`, with command-line overrides applied.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let kind = cli.kind.ok_or_else(|| CliError::Config("no experiment kind given".into()))?;
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?,
        None => "{}".to_string(),
    };
    let mut config = ExperimentConfig::parse(kind, &text)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.display().to_string());
    }
    Ok(config)
}

pub fn output_path(config: &ExperimentConfig) -> PathBuf {
    match &config.out {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(format!("{}.csv", config.kind.name())),
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = resolve_config(cli)?;
    let options = RunOptions { override_resonance_guard: cli.override_resonance_guard };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_and_write(&config, options, &output_path(&config)).map(|_| ()))
}

/// Runs `config` and writes the CSV and sidecar to `out`. Regression runs
/// print one line per row and fail with [`CliError::Regression`] after
/// writing when any row fails.
pub fn run_and_write(config: &ExperimentConfig, options: RunOptions, out: &Path) -> Result<Sidecar, CliError> {
    if let Params::RegressAll(p) = &config.params {
        let report = regress::regress_all(p, config.seed)?;
        for row in &report.rows {
            println!("{}", row.line());
        }
        let meta = table::write(&report.table(), config, out)?;
        println!("wrote {} ({} criteria rows)", out.display(), report.rows.len());
        return match report.failed() {
            0 => Ok(meta),
            failed => Err(CliError::Regression { failed }),
        };
    }
    let table = experiments::run(config, options)?;
    let meta = table::write(&table, config, out)?;
    println!("wrote {} ({} rows)", out.display(), table.rows.len());
    Ok(meta)
}
