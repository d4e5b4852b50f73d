//! Alternating optimization of power and RIS phases.
//!
//! Each iteration computes the optimal power for the current phases, then
//! looks for phases under which that power point has more margin. The
//! randomization keeps the incumbent phases, so the power point stays
//! feasible and the objective cannot increase.

use std::f64::consts::TAU;

use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gains::{fd_gains, hd_gains, LinkGains, Mode, PhaseVector};
use crate::phase_opt::{align_phases, build_fd_lifting, build_hd_lifting, ct_phase_alignment, gaussian_randomization, LiftedProblem};
use crate::power::{optimal_power, PowerBudget, PowerSolution, SinrTargets};
use crate::scenario::{stream_rng, ChannelRealization, ScenarioConfig, FIRST_USER_STREAM};
use crate::sdp::{solve_max_slack, SdpOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Align the BS to RIS to UE_f cascade with the direct BS to UE_f link.
    #[default]
    CtAligned,
    RandomPhases,
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AoConfig {
    /// Stop once an iteration lowers the objective by less than this (watts).
    pub epsilon: f64,
    pub max_iters: usize,
    pub sdp: SdpOptions,
    pub samples: usize,
    pub init: InitMode,
    /// Seed of the randomization draws.
    pub rng_seed: u64,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            max_iters: 20,
            sdp: SdpOptions::default(),
            samples: 1000,
            init: InitMode::CtAligned,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoTrace {
    /// Objective after each power step; `+∞` marks an infeasible step.
    pub objectives: Vec<f64>,
    pub feasible: Vec<bool>,
    pub power: PowerSolution,
    /// BS-slot phases (the only phases in FD).
    pub theta: PhaseVector,
    /// Cooperative-slot phases, HD only.
    pub theta_ct: Option<PhaseVector>,
    pub iterations: usize,
    /// Stopped because the decrease fell below `epsilon`.
    pub converged: bool,
}

impl AoTrace {
    pub fn is_feasible(&self) -> bool {
        self.power.feasible
    }

    pub fn final_objective(&self) -> f64 {
        self.power.total_watts
    }
}

fn initial_phases(ch: &ChannelRealization, ao: &AoConfig, rng: &mut impl Rng) -> PhaseVector {
    let m = ch.elements();
    match ao.init {
        InitMode::CtAligned => align_phases(ch.h_bf, &ch.h_rf, &ch.h_br),
        InitMode::RandomPhases => PhaseVector::new((0..m).map(|_| rng.random_range(0.0..TAU)).collect()),
        InitMode::Zeros => PhaseVector::zeros(m),
    }
}

fn alternate(
    ch: &ChannelRealization,
    cfg: &ScenarioConfig,
    ao: &AoConfig,
    mode: Mode,
    gains: impl Fn(&PhaseVector) -> LinkGains,
    lift: impl Fn(&PowerSolution, &LinkGains) -> LiftedProblem,
) -> AoTrace {
    let budget = PowerBudget::from(cfg);
    let t = SinrTargets::new(cfg.rate_n, cfg.rate_f, mode);
    let mut rng = stream_rng(ao.rng_seed, mode as u64, FIRST_USER_STREAM);
    let mut theta = initial_phases(ch, ao, &mut rng);
    let mut trace = AoTrace {
        objectives: Vec::new(),
        feasible: Vec::new(),
        power: PowerSolution::infeasible(),
        theta: theta.clone(),
        theta_ct: None,
        iterations: 0,
        converged: false,
    };
    let mut previous = budget.ceiling();
    loop {
        let g = gains(&theta);
        let p = match optimal_power(&g, &t, &budget) {
            Ok(p) if p.total_watts <= previous || trace.objectives.is_empty() => p,
            other => {
                if trace.objectives.is_empty() {
                    trace.objectives.push(f64::INFINITY);
                    trace.feasible.push(false);
                    trace.iterations = 1;
                } else {
                    // Keep the incumbent; a worse or infeasible point can only
                    // come from round-off at a tight constraint.
                    debug!("phase update rejected: {other:?}");
                    trace.converged = true;
                }
                break;
            }
        };
        trace.objectives.push(p.total_watts);
        trace.feasible.push(true);
        trace.iterations = trace.objectives.len();
        trace.power = p;
        trace.theta = theta.clone();
        let decrease = previous - p.total_watts;
        previous = p.total_watts;
        if theta.is_empty() || decrease < ao.epsilon {
            trace.converged = true;
            break;
        }
        if trace.iterations >= ao.max_iters {
            break;
        }
        let lifted = lift(&p, &g);
        let sol = solve_max_slack(&lifted.instance, &ao.sdp);
        theta = gaussian_randomization(&sol, &lifted, ao.samples, &mut rng, &theta);
    }
    trace
}

pub fn optimize_hd(ch: &ChannelRealization, cfg: &ScenarioConfig, ao: &AoConfig) -> AoTrace {
    let theta2 = ct_phase_alignment(ch.h_nf, &ch.h_nr, &ch.h_rf_hat);
    let t = SinrTargets::new(cfg.rate_n, cfg.rate_f, Mode::Hd);
    let mut trace = alternate(
        ch,
        cfg,
        ao,
        Mode::Hd,
        |th| hd_gains(ch, th, &theta2, cfg).expect("realization vectors share length M"),
        |p, g| build_hd_lifting(ch, p, &t, p.beta * g.gamma_d, cfg),
    );
    trace.theta_ct = Some(theta2);
    trace
}

pub fn optimize_fd(ch: &ChannelRealization, cfg: &ScenarioConfig, ao: &AoConfig) -> AoTrace {
    let t = SinrTargets::new(cfg.rate_n, cfg.rate_f, Mode::Fd);
    alternate(
        ch,
        cfg,
        ao,
        Mode::Fd,
        |th| fd_gains(ch, th, cfg).expect("realization vectors share length M"),
        |p, _| build_fd_lifting(ch, p, &t, cfg),
    )
}

/// Closed-form power on the direct links alone.
pub fn baseline_no_ris(ch: &ChannelRealization, cfg: &ScenarioConfig, mode: Mode) -> PowerSolution {
    let direct = ch.without_ris();
    let none = PhaseVector::zeros(0);
    let g = match mode {
        Mode::Hd => hd_gains(&direct, &none, &none, cfg),
        Mode::Fd => fd_gains(&direct, &none, cfg),
    }
    .expect("no RIS vectors");
    let t = SinrTargets::new(cfg.rate_n, cfg.rate_f, mode);
    optimal_power(&g, &t, &PowerBudget::from(cfg)).unwrap_or_else(|_| PowerSolution::infeasible())
}
