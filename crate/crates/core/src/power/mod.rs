//! Closed-form power control for fixed phases.
//!
//! A power triple `(α_n, α_f, β)` splits the BS budget between the two users
//! (`α_n`, `α_f`) and sets the fraction `β` of UE_n's budget spent relaying.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gains::{LinkGains, Mode};
use crate::scenario::ScenarioConfig;

pub mod fd;
pub mod hd;

pub use fd::{fd_candidates, fd_feasibility, fd_optimal_power, fd_rates, fd_targets, FdCandidateSet, RegionCase};
pub use hd::{hd_candidates, hd_feasibility, hd_optimal_power, hd_rates, hd_targets};

/// Absolute tolerance on rate differences when checking QoS constraints.
pub const RATE_TOL: f64 = 1e-9;
/// Slack allowed on the structural constraints (ordering, budgets).
pub(crate) const STRUCT_TOL: f64 = 1e-12;

/// SINR thresholds derived from the rate thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrTargets {
    pub t_n: f64,
    pub t_f: f64,
    pub mode: Mode,
}

impl SinrTargets {
    pub fn new(r_n: f64, r_f: f64, mode: Mode) -> Self {
        match mode {
            Mode::Hd => hd_targets(r_n, r_f),
            Mode::Fd => fd_targets(r_n, r_f),
        }
    }

    fn prelog(&self) -> f64 {
        match self.mode {
            Mode::Hd => 0.5,
            Mode::Fd => 1.0,
        }
    }

    /// Rate threshold of UE_n in bits/s/Hz.
    pub fn rate_n(&self) -> f64 {
        self.prelog() * self.t_n.ln_1p() / std::f64::consts::LN_2
    }

    pub fn rate_f(&self) -> f64 {
        self.prelog() * self.t_f.ln_1p() / std::f64::consts::LN_2
    }
}

/// Transmit budgets in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    pub p_bs: f64,
    pub p_n: f64,
}

impl From<&ScenarioConfig> for PowerBudget {
    fn from(cfg: &ScenarioConfig) -> Self {
        Self {
            p_bs: cfg.p_bs,
            p_n: cfg.p_n,
        }
    }
}

impl PowerBudget {
    pub fn total(&self, alpha_n: f64, alpha_f: f64, beta: f64) -> f64 {
        (alpha_n + alpha_f) * self.p_bs + beta * self.p_n
    }

    /// Both nodes at full power.
    pub fn ceiling(&self) -> f64 {
        self.p_bs + self.p_n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSolution {
    pub alpha_n: f64,
    pub alpha_f: f64,
    pub beta: f64,
    pub feasible: bool,
    pub total_watts: f64,
}

impl PowerSolution {
    pub fn new(alpha_n: f64, alpha_f: f64, beta: f64, budget: &PowerBudget) -> Self {
        Self {
            alpha_n,
            alpha_f,
            beta,
            feasible: true,
            total_watts: budget.total(alpha_n, alpha_f, beta),
        }
    }

    pub fn infeasible() -> Self {
        Self {
            alpha_n: f64::NAN,
            alpha_f: f64::NAN,
            beta: f64::NAN,
            feasible: false,
            total_watts: f64::NAN,
        }
    }

    pub fn bs_watts(&self, budget: &PowerBudget) -> f64 {
        (self.alpha_n + self.alpha_f) * budget.p_bs
    }

    pub fn relay_watts(&self, budget: &PowerBudget) -> f64 {
        self.beta * budget.p_n
    }

    /// Ordering, budget and range constraints shared by both modes.
    pub fn is_structurally_valid(&self) -> bool {
        let (an, af, b) = (self.alpha_n, self.alpha_f, self.beta);
        [an, af, b].iter().all(|x| x.is_finite())
            && an >= -STRUCT_TOL
            && an <= af + STRUCT_TOL
            && an + af <= 1.0 + STRUCT_TOL
            && (-STRUCT_TOL..=1.0 + STRUCT_TOL).contains(&b)
    }
}

/// Feasible ranges of `α_n` and `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBox {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub feasible: bool,
}

/// Achievable rates in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub n_to_n: f64,
    /// UE_n decoding UE_f's message before SIC.
    pub n_to_f: f64,
    /// UE_f after maximum-ratio combining of the direct and relayed copies.
    pub mrc: f64,
    pub f_to_f: f64,
}

impl Rates {
    pub fn meets(&self, t: &SinrTargets, tol: f64) -> bool {
        self.n_to_n >= t.rate_n() - tol && self.f_to_f >= t.rate_f() - tol
    }
}

pub fn feasibility(g: &LinkGains, t: &SinrTargets) -> FeasibleBox {
    match g.mode {
        Mode::Hd => hd_feasibility(g, t),
        Mode::Fd => fd_feasibility(g, t),
    }
}

pub fn rates(g: &LinkGains, p: &PowerSolution) -> Rates {
    match g.mode {
        Mode::Hd => hd_rates(g, p),
        Mode::Fd => fd_rates(g, p),
    }
}

pub fn optimal_power(g: &LinkGains, t: &SinrTargets, budget: &PowerBudget) -> Result<PowerSolution> {
    match g.mode {
        Mode::Hd => hd_optimal_power(g, t, budget),
        Mode::Fd => fd_optimal_power(g, t, budget),
    }
}

/// Structural constraints plus every rate constraint of the gains' mode.
pub fn satisfies(g: &LinkGains, t: &SinrTargets, p: &PowerSolution, tol: f64) -> bool {
    p.is_structurally_valid() && rates(g, p).meets(t, tol)
}

/// Index of the cheapest candidate; earlier entries win ties.
pub(crate) fn cheapest(cands: &[PowerSolution]) -> Option<PowerSolution> {
    cands
        .iter()
        .copied()
        .fold(None, |best: Option<PowerSolution>, c| match best {
            Some(b) if b.total_watts <= c.total_watts => Some(b),
            _ => Some(c),
        })
}

pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}
