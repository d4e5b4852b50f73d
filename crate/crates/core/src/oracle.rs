//! Brute-force references: an exhaustive power grid and a coordinate-ascent
//! phase search.
//!
//! Rates are evaluated here with their own formulas rather than through
//! [`crate::power`], so the closed forms and the grid check each other.

use std::f64::consts::TAU;

use crate::gains::{LinkGains, Mode, PhaseVector};
use crate::phase_opt::LiftedProblem;
use crate::power::{PowerBudget, PowerSolution, SinrTargets};

const TOL: f64 = 1e-9;

/// Grid-point values `{0, step, …}` up to 1.
struct Axis {
    k: usize,
    step: f64,
    exact: bool,
}

impl Axis {
    fn new(step: f64) -> Self {
        assert!(step > 0.0 && step <= 0.1, "grid step must be in (0, 0.1]");
        let inv = 1.0 / step;
        let k_round = inv.round();
        if (inv - k_round).abs() <= 1e-9 * inv {
            Self {
                k: k_round as usize,
                step,
                exact: true,
            }
        } else {
            Self {
                k: inv.floor() as usize,
                step,
                exact: false,
            }
        }
    }

    fn at(&self, i: usize) -> f64 {
        if self.exact {
            i as f64 / self.k as f64
        } else {
            i as f64 * self.step
        }
    }
}

/// Rate requirements checked on the grid.
struct Check<'a> {
    g: &'a LinkGains,
    rate_n: f64,
    rate_f: f64,
    half: bool,
}

impl<'a> Check<'a> {
    fn new(g: &'a LinkGains, t: &SinrTargets) -> Self {
        let half = matches!(t.mode, Mode::Hd);
        let pre = if half { 0.5 } else { 1.0 };
        Self {
            g,
            rate_n: pre * (1.0 + t.t_n).log2(),
            rate_f: pre * (1.0 + t.t_f).log2(),
            half,
        }
    }

    fn rate(&self, sinr: f64) -> f64 {
        let r = (1.0 + sinr).log2();
        if self.half {
            r / 2.0
        } else {
            r
        }
    }

    /// UE_n decodes its own message.
    fn near_ok(&self, an: f64, beta: f64) -> bool {
        let g = self.g;
        let interference = if self.half { 0.0 } else { beta * g.gamma_si };
        self.rate(an * g.gamma_bn / (interference + 1.0)) >= self.rate_n - TOL
    }

    /// UE_f's message is decodable at UE_n (before SIC) and at UE_f.
    fn far_ok(&self, an: f64, af: f64, beta: f64) -> bool {
        let g = self.g;
        let (at_near, at_far) = if self.half {
            (
                af * g.gamma_bn / (an * g.gamma_bn + 1.0),
                af * g.gamma_bf / (an * g.gamma_bf + 1.0) + beta * g.gamma_d,
            )
        } else {
            (
                af * g.gamma_bn / (an * g.gamma_bn + beta * g.gamma_si + 1.0),
                (af * g.gamma_bf + beta * g.gamma_d) / (an * g.gamma_bf + 1.0),
            )
        };
        self.rate(at_near).min(self.rate(at_far)) >= self.rate_f - TOL
    }
}

/// Exhaustive search over `(α_n, α_f, β)` on a uniform grid.
///
/// For each `(α_n, β)` the smallest feasible `α_f` is found by bisection
/// (both UE_f rates increase with `α_f`), and `(α_n, β)` pairs whose lower
/// bound `2 α_n P_BS + β P_n` already exceeds the incumbent are skipped.
/// Ties are broken lexicographically on `(α_n, α_f, β)`.
pub fn grid_search_power(g: &LinkGains, t: &SinrTargets, budget: &PowerBudget, step: f64) -> PowerSolution {
    search(g, t, budget, step, false)
}

/// Whether any grid point is feasible; stops at the first one found.
pub fn grid_has_feasible_point(g: &LinkGains, t: &SinrTargets, step: f64) -> bool {
    let budget = PowerBudget { p_bs: 1.0, p_n: 1.0 };
    search(g, t, &budget, step, true).feasible
}

fn search(g: &LinkGains, t: &SinrTargets, budget: &PowerBudget, step: f64, first_only: bool) -> PowerSolution {
    let axis = Axis::new(step);
    let k = axis.k;
    let check = Check::new(g, t);
    let mut best: Option<(f64, usize, usize, usize)> = None;
    let total = |i: usize, f: usize, j: usize| budget.total(axis.at(i), axis.at(f), axis.at(j));

    // α_n ≤ α_f and α_n + α_f ≤ 1 keep α_n within [0, ½].
    for i in 0..=k {
        let an = axis.at(i);
        let top = k.saturating_sub(i);
        if i > top {
            break;
        }
        if let Some((b, ..)) = best {
            if 2.0 * an * budget.p_bs > b {
                break;
            }
        }
        for j in 0..=k {
            let beta = axis.at(j);
            if let Some((b, ..)) = best {
                if 2.0 * an * budget.p_bs + beta * budget.p_n > b {
                    break;
                }
            }
            if !check.near_ok(an, beta) || !check.far_ok(an, axis.at(top), beta) {
                continue;
            }
            // Smallest α_f index in [i, top] meeting the far-user rates.
            let (mut lo, mut hi) = (i, top);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if check.far_ok(an, axis.at(mid), beta) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let cand = (total(i, lo, j), i, lo, j);
            let better = match best {
                None => true,
                Some(b) => cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2, cand.3) < (b.1, b.2, b.3)),
            };
            if better {
                best = Some(cand);
                if first_only {
                    break;
                }
            }
        }
        if first_only && best.is_some() {
            break;
        }
    }
    match best {
        Some((_, i, f, j)) => PowerSolution::new(axis.at(i), axis.at(f), axis.at(j), budget),
        None => PowerSolution::infeasible(),
    }
}

/// Cyclic one-element-at-a-time search over a uniform phase grid, maximizing
/// the smallest normalized margin of the lifted problem's constraints.
pub fn coordinate_ascent_phases(lifted: &LiftedProblem, init: &PhaseVector, sweeps: usize, grid: usize) -> PhaseVector {
    assert!(grid >= 8, "phase grid needs at least 8 points");
    let mut theta = init.as_slice().to_vec();
    let mut best = lifted.min_margin(init);
    for _ in 0..sweeps {
        for m in 0..theta.len() {
            let keep = theta[m];
            let mut arg = keep;
            for k in 0..grid {
                theta[m] = TAU * k as f64 / grid as f64;
                let v = lifted.min_margin(&PhaseVector::new(theta.clone()));
                if v > best {
                    best = v;
                    arg = theta[m];
                }
            }
            theta[m] = arg;
        }
    }
    PhaseVector::new(theta)
}
