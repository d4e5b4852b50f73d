//! Command-line front end; the binary only forwards to [`cli_main`].
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use log::info;

use super::config::{load_config_file, ConfigFile};
use super::{run_to_csv, ExperimentKind, Scheme};
use crate::error::{Error, Result};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "RIS_CNOMA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ris-cnoma", version, about = "Monte-Carlo power-minimization sweeps for RIS-assisted cooperative NOMA")]
struct Args {
    /// convergence | power-vs-rate | power-vs-elements | power-vs-si | power-split
    #[arg(long)]
    experiment: Option<String>,
    /// JSON file with `scenario` and `experiment` objects.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated RIS sizes.
    #[arg(long, value_delimiter = ',')]
    elements: Option<Vec<usize>>,
    /// Comma-separated UE_f rate thresholds (bits/s/Hz).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rf_grid: Option<Vec<f64>>,
    /// Comma-separated SI variances in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    si_grid_db: Option<Vec<f64>>,
    /// Comma-separated schemes: ris-fd, ris-hd, nofd, nohd.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Grid step of the oracle cross-check.
    #[arg(long)]
    step: Option<f64>,
    /// Cross-check every feasible trial against the grid oracle.
    #[arg(long)]
    verify: bool,
    /// Refuse to fall back to built-in defaults; requires --config.
    #[arg(long)]
    no_defaults: bool,
}

fn build_spec(args: &Args) -> Result<super::ExperimentSpec> {
    let kind = match &args.experiment {
        Some(s) => Some(ExperimentKind::parse(s).ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))?),
        None => None,
    };
    let file = match &args.config {
        Some(path) => load_config_file(path)?,
        None if args.no_defaults => return Err(Error::Config("--no-defaults requires --config".into())),
        None => ConfigFile::default(),
    };
    let mut spec = file.into_spec(kind)?;
    if let Some(v) = args.trials {
        spec.trials = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = &args.elements {
        spec.elements = v.clone();
    }
    if let Some(v) = &args.rf_grid {
        spec.rf_grid = v.clone();
    }
    if let Some(v) = &args.si_grid_db {
        spec.si_grid_db = v.clone();
    }
    if let Some(v) = &args.schemes {
        spec.schemes = v
            .iter()
            .map(|s| Scheme::parse(s).ok_or_else(|| Error::Config(format!("unknown scheme `{s}`"))))
            .collect::<Result<_>>()?;
    }
    if args.verify || args.step.is_some() {
        spec.verify_step = Some(args.step.or(spec.verify_step).unwrap_or(1e-2));
    }
    spec.validate()?;
    Ok(spec)
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
    }
}

fn run(args: &Args) -> Result<()> {
    let spec = build_spec(args)?;
    let cap = thread_cap()?;
    info!(
        "{}: {} trials, seed {}, schemes {:?}",
        spec.kind.name(),
        spec.trials,
        spec.seed,
        spec.schemes.iter().map(|s| s.name()).collect::<Vec<_>>()
    );
    let work = || run_to_csv(&spec, args.out.as_deref());
    let (records, csv) = match cap {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    match &args.out {
        Some(path) => info!("wrote {} rows to {}", records.len(), path.display()),
        None => print!("{csv}"),
    }
    Ok(())
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(()) => 0,
        Err(e @ (Error::Config(_) | Error::Json(_))) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
