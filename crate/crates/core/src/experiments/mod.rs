//! Monte-Carlo sweeps over rate threshold, RIS size and self-interference,
//! written as CSV.
//!
//! Every sweep point reuses the same channel draws (trial `i` always uses
//! `generate_realization(cfg, i, seed)`), so curves differ only by the swept
//! parameter. Infeasible trials are left out of the power means and counted
//! in the `outage` column.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alt_opt::{baseline_no_ris, optimize_fd, optimize_hd, AoConfig};
use crate::error::{Error, Result};
use crate::gains::{fd_gains, hd_gains, LinkGains, Mode, PhaseVector};
use crate::oracle::grid_search_power;
use crate::power::{PowerBudget, PowerSolution, SinrTargets};
use crate::scenario::{db_to_linear, generate_realization, watts_to_dbm, ChannelRealization, ScenarioConfig};

pub mod cli;
pub mod config;

pub use cli::cli_main;
pub use config::{load_config_file, ConfigFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Objective per alternating-optimization iteration.
    Convergence,
    PowerVsRate,
    PowerVsElements,
    PowerVsSi,
    /// BS and UE_n power separately, versus self-interference.
    PowerSplit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Convergence => "convergence",
            Self::PowerVsRate => "power-vs-rate",
            Self::PowerVsElements => "power-vs-elements",
            Self::PowerVsSi => "power-vs-si",
            Self::PowerSplit => "power-split",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::Convergence,
            Self::PowerVsRate,
            Self::PowerVsElements,
            Self::PowerVsSi,
            Self::PowerSplit,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    RisFd,
    RisHd,
    /// FD relaying without the RIS.
    #[serde(rename = "nofd")]
    NoFd,
    #[serde(rename = "nohd")]
    NoHd,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::RisFd => "ris-fd",
            Self::RisHd => "ris-hd",
            Self::NoFd => "nofd",
            Self::NoHd => "nohd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::RisFd, Self::RisHd, Self::NoFd, Self::NoHd]
            .into_iter()
            .find(|k| k.name() == s)
    }

    pub fn mode(self) -> Mode {
        match self {
            Self::RisFd | Self::NoFd => Mode::Fd,
            Self::RisHd | Self::NoHd => Mode::Hd,
        }
    }

    pub fn uses_ris(self) -> bool {
        matches!(self, Self::RisFd | Self::RisHd)
    }
}

/// A complete, validated description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    /// RIS sizes (power-vs-elements sweep, or series for power-split).
    pub elements: Vec<usize>,
    /// UE_f rate thresholds in bits/s/Hz (power-vs-rate sweep).
    pub rf_grid: Vec<f64>,
    /// SI variances in dB (power-vs-si / power-split sweep, or series for
    /// power-vs-rate).
    pub si_grid_db: Vec<f64>,
    pub scenario: ScenarioConfig,
    pub ao: AoConfig,
    /// Grid step for the oracle cross-check; `None` disables it.
    pub verify_step: Option<f64>,
}

impl ExperimentSpec {
    /// Desk-scale defaults for `kind` on the default scenario.
    pub fn new(kind: ExperimentKind) -> Self {
        let (schemes, elements, rf_grid, si_grid_db) = match kind {
            ExperimentKind::Convergence => (vec![Scheme::RisFd, Scheme::RisHd], vec![32], vec![2.0], vec![-100.0]),
            ExperimentKind::PowerVsRate => (
                vec![Scheme::RisFd, Scheme::RisHd, Scheme::NoFd, Scheme::NoHd],
                vec![32],
                vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
                vec![-100.0, -80.0],
            ),
            ExperimentKind::PowerVsElements => (
                vec![Scheme::RisFd, Scheme::RisHd, Scheme::NoFd],
                vec![8, 16, 32],
                vec![2.0],
                vec![-100.0],
            ),
            ExperimentKind::PowerVsSi => (
                vec![Scheme::RisFd, Scheme::NoFd],
                vec![32],
                vec![2.0],
                vec![-110.0, -100.0, -90.0, -80.0],
            ),
            ExperimentKind::PowerSplit => (vec![Scheme::RisFd], vec![16, 32], vec![2.0], vec![-110.0, -100.0, -90.0, -80.0]),
        };
        Self {
            kind,
            trials: 200,
            seed: 1,
            schemes,
            elements,
            rf_grid,
            si_grid_db,
            scenario: ScenarioConfig::default(),
            ao: AoConfig::default(),
            verify_step: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        let sorted = |v: &[f64]| v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1]);
        if self.elements.is_empty() || !self.elements.windows(2).all(|w| w[0] < w[1]) {
            return bad(format!("elements must be non-empty and strictly increasing: {:?}", self.elements));
        }
        if self.rf_grid.is_empty() || !sorted(&self.rf_grid) || self.rf_grid[0] < 0.0 {
            return bad(format!("rf grid must be non-empty, finite, non-negative and increasing: {:?}", self.rf_grid));
        }
        if self.si_grid_db.is_empty() || !sorted(&self.si_grid_db) {
            return bad(format!("si grid must be non-empty, finite and increasing: {:?}", self.si_grid_db));
        }
        if !(self.ao.epsilon > 0.0) || self.ao.max_iters == 0 {
            return bad("ao.epsilon must be > 0 and ao.max_iters >= 1".into());
        }
        if let Some(step) = self.verify_step {
            if !(step > 0.0 && step <= 0.1) {
                return bad(format!("oracle step must be in (0, 0.1], got {step}"));
            }
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    /// Scheme name, possibly qualified with a component (`ris-fd:bs`) and a
    /// series parameter (`ris-fd@omega_si_db=-80`).
    pub scheme: String,
    pub mean_power_dbm: f64,
    pub mean_power_watts: f64,
    pub outage: f64,
    pub mean_iters: f64,
    pub trials: usize,
    pub seed: u64,
    pub oracle_gap: Option<OracleGap>,
}

/// Closed-form total minus grid-oracle total over feasible trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGap {
    pub mean_watts: f64,
    pub max_watts: f64,
}

/// Result of one scheme on one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub power: PowerSolution,
    pub iterations: usize,
    /// Objective per iteration (a single entry for no-RIS schemes).
    pub objectives: Vec<f64>,
    /// Gains at the final phases, for cross-checks.
    pub gains: LinkGains,
}

fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed.rotate_left(17) ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `scheme` on one realization.
pub fn run_scheme(ch: &ChannelRealization, cfg: &ScenarioConfig, scheme: Scheme, ao: &AoConfig) -> TrialOutcome {
    if scheme.uses_ris() {
        let trace = match scheme.mode() {
            Mode::Hd => optimize_hd(ch, cfg, ao),
            Mode::Fd => optimize_fd(ch, cfg, ao),
        };
        let gains = match scheme.mode() {
            Mode::Hd => hd_gains(ch, &trace.theta, trace.theta_ct.as_ref().expect("HD trace"), cfg),
            Mode::Fd => fd_gains(ch, &trace.theta, cfg),
        }
        .expect("phases match the realization");
        TrialOutcome {
            power: trace.power,
            iterations: trace.iterations,
            objectives: trace.objectives,
            gains,
        }
    } else {
        let power = baseline_no_ris(ch, cfg, scheme.mode());
        let direct = ch.without_ris();
        let none = PhaseVector::zeros(0);
        let gains = match scheme.mode() {
            Mode::Hd => hd_gains(&direct, &none, &none, cfg),
            Mode::Fd => fd_gains(&direct, &none, cfg),
        }
        .expect("no RIS vectors");
        TrialOutcome {
            power,
            iterations: 1,
            objectives: vec![if power.feasible { power.total_watts } else { f64::INFINITY }],
            gains,
        }
    }
}

/// Runs every trial of `scheme` at scenario `cfg`, in trial order.
pub fn run_trials(cfg: &ScenarioConfig, scheme: Scheme, spec: &ExperimentSpec) -> Vec<TrialOutcome> {
    (0..spec.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let ch = generate_realization(cfg, trial, spec.seed);
            let ao = AoConfig {
                rng_seed: trial_seed(spec.seed, trial),
                ..spec.ao.clone()
            };
            run_scheme(&ch, cfg, scheme, &ao)
        })
        .collect()
}

struct Point {
    sweep_name: &'static str,
    sweep_value: f64,
    series: Option<String>,
    cfg: ScenarioConfig,
}

fn points(spec: &ExperimentSpec) -> Vec<Point> {
    let base = &spec.scenario;
    let with = |m: usize, rf: f64, si_db: f64| {
        let mut c = base.clone().with_elements(m);
        c.rate_f = rf;
        c.omega_si = db_to_linear(si_db);
        c
    };
    let m0 = spec.elements[0];
    let rf0 = spec.rf_grid[0];
    let si0 = spec.si_grid_db[0];
    let mut out = Vec::new();
    match spec.kind {
        ExperimentKind::Convergence => out.push(Point {
            sweep_name: "iteration",
            sweep_value: 0.0,
            series: None,
            cfg: with(m0, rf0, si0),
        }),
        ExperimentKind::PowerVsRate => {
            for &si in &spec.si_grid_db {
                for &rf in &spec.rf_grid {
                    out.push(Point {
                        sweep_name: "rf_bps_hz",
                        sweep_value: rf,
                        series: (spec.si_grid_db.len() > 1).then(|| format!("omega_si_db={si}")),
                        cfg: with(m0, rf, si),
                    });
                }
            }
        }
        ExperimentKind::PowerVsElements => {
            for &m in &spec.elements {
                out.push(Point {
                    sweep_name: "elements",
                    sweep_value: m as f64,
                    series: None,
                    cfg: with(m, rf0, si0),
                });
            }
        }
        ExperimentKind::PowerVsSi | ExperimentKind::PowerSplit => {
            let series = spec.kind == ExperimentKind::PowerSplit && spec.elements.len() > 1;
            let ms: &[usize] = if spec.kind == ExperimentKind::PowerSplit { &spec.elements } else { &spec.elements[..1] };
            for &m in ms {
                for &si in &spec.si_grid_db {
                    out.push(Point {
                        sweep_name: "omega_si_db",
                        sweep_value: si,
                        series: series.then(|| format!("elements={m}")),
                        cfg: with(m, rf0, si),
                    });
                }
            }
        }
    }
    out
}

fn label(scheme: Scheme, part: Option<&str>, series: &Option<String>) -> String {
    let mut s = scheme.name().to_string();
    if let Some(p) = part {
        let _ = write!(s, ":{p}");
    }
    if let Some(x) = series {
        let _ = write!(s, "@{x}");
    }
    s
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn oracle_gap(outcomes: &[TrialOutcome], cfg: &ScenarioConfig, mode: Mode, step: f64) -> OracleGap {
    let budget = PowerBudget::from(cfg);
    let t = SinrTargets::new(cfg.rate_n, cfg.rate_f, mode);
    let gaps: Vec<f64> = outcomes
        .par_iter()
        .filter(|o| o.power.feasible)
        .map(|o| {
            let reference = grid_search_power(&o.gains, &t, &budget, step);
            if reference.feasible {
                o.power.total_watts - reference.total_watts
            } else {
                f64::NAN
            }
        })
        .collect();
    OracleGap {
        mean_watts: mean(gaps.iter().copied()),
        max_watts: gaps.iter().copied().fold(f64::NAN, f64::max),
    }
}

/// Runs the sweep and returns one record per (point, scheme[, component]).
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let mut records = Vec::new();
    let base = |sweep_name: &str, sweep_value: f64, scheme: String| ExperimentRecord {
        experiment: spec.kind.name().to_string(),
        sweep_name: sweep_name.to_string(),
        sweep_value,
        scheme,
        mean_power_dbm: f64::NAN,
        mean_power_watts: f64::NAN,
        outage: 0.0,
        mean_iters: f64::NAN,
        trials: spec.trials,
        seed: spec.seed,
        oracle_gap: None,
    };
    for point in points(spec) {
        for &scheme in &spec.schemes {
            let outcomes = run_trials(&point.cfg, scheme, spec);
            let feasible: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.power.feasible).collect();
            let outage = 1.0 - feasible.len() as f64 / outcomes.len() as f64;
            let mean_iters = mean(feasible.iter().map(|o| o.iterations as f64));
            let gap = spec.verify_step.map(|step| oracle_gap(&outcomes, &point.cfg, scheme.mode(), step));
            let budget = PowerBudget::from(&point.cfg);
            let mut push = |sweep_name: &str, sweep_value: f64, part: Option<&str>, watts: f64| {
                let mut r = base(sweep_name, sweep_value, label(scheme, part, &point.series));
                r.mean_power_watts = watts;
                r.mean_power_dbm = watts_to_dbm(watts);
                r.outage = outage;
                r.mean_iters = mean_iters;
                r.oracle_gap = gap;
                records.push(r);
            };
            match spec.kind {
                ExperimentKind::Convergence => {
                    let longest = feasible.iter().map(|o| o.objectives.len()).max().unwrap_or(0);
                    for k in 0..longest {
                        // Finished runs keep their final value.
                        let w = mean(feasible.iter().map(|o| o.objectives[k.min(o.objectives.len() - 1)]));
                        push(point.sweep_name, (k + 1) as f64, None, w);
                    }
                }
                ExperimentKind::PowerSplit => {
                    push(point.sweep_name, point.sweep_value, Some("bs"), mean(feasible.iter().map(|o| o.power.bs_watts(&budget))));
                    push(point.sweep_name, point.sweep_value, Some("ue-n"), mean(feasible.iter().map(|o| o.power.relay_watts(&budget))));
                }
                _ => push(point.sweep_name, point.sweep_value, None, mean(feasible.iter().map(|o| o.power.total_watts))),
            }
        }
    }
    Ok(records)
}

pub const CSV_COLUMNS: [&str; 10] = [
    "experiment",
    "sweep_name",
    "sweep_value",
    "scheme",
    "mean_power_dbm",
    "mean_power_watts",
    "outage",
    "mean_iters",
    "trials",
    "seed",
];

/// CSV text: `#` metadata, header, rows. Oracle columns are appended when
/// any record carries them.
pub fn to_csv(spec: &ExperimentSpec, records: &[ExperimentRecord]) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# ris-cnoma {} experiment", spec.kind.name());
    let _ = writeln!(out, "# infeasible trials are excluded from power means and counted in `outage`");
    let _ = writeln!(out, "# powers: mean over feasible trials; dBm = 10 log10(1000 * mean watts)");
    let _ = writeln!(out, "# config: {}", serde_json::to_string(spec)?);
    let verify = records.iter().any(|r| r.oracle_gap.is_some());
    let mut header = CSV_COLUMNS.join(",");
    if verify {
        header.push_str(",oracle_mean_gap_watts,oracle_max_gap_watts");
    }
    let _ = writeln!(out, "{header}");
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.experiment, r.sweep_name, r.sweep_value, r.scheme, r.mean_power_dbm, r.mean_power_watts, r.outage, r.mean_iters, r.trials, r.seed
        );
        if verify {
            let g = r.oracle_gap.unwrap_or(OracleGap {
                mean_watts: f64::NAN,
                max_watts: f64::NAN,
            });
            let _ = write!(out, ",{},{}", g.mean_watts, g.max_watts);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Runs `spec` and writes the CSV to `out` when given.
pub fn run_to_csv(spec: &ExperimentSpec, out: Option<&Path>) -> Result<(Vec<ExperimentRecord>, String)> {
    let records = run_experiment(spec)?;
    let csv = to_csv(spec, &records)?;
    if let Some(path) = out {
        write_atomic(path, &csv)?;
    }
    Ok((records, csv))
}
