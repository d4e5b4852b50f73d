//! Half-duplex relaying: UE_n forwards UE_f's message in a second slot,
//! hence the ½ pre-log on every rate.

use log::warn;

use super::{cheapest, log2_1p, satisfies, FeasibleBox, PowerBudget, PowerSolution, Rates, SinrTargets, RATE_TOL};
use crate::error::{Error, Result};
use crate::gains::{LinkGains, Mode};

pub fn hd_targets(r_n: f64, r_f: f64) -> SinrTargets {
    SinrTargets {
        t_n: (2.0 * r_n).exp2() - 1.0,
        t_f: (2.0 * r_f).exp2() - 1.0,
        mode: Mode::Hd,
    }
}

pub fn hd_rates(g: &LinkGains, p: &PowerSolution) -> Rates {
    let (an, af, b) = (p.alpha_n, p.alpha_f, p.beta);
    let n_to_n = 0.5 * log2_1p(an * g.gamma_bn);
    let n_to_f = 0.5 * log2_1p(af * g.gamma_bn / (an * g.gamma_bn + 1.0));
    let mrc = 0.5 * log2_1p(af * g.gamma_bf / (an * g.gamma_bf + 1.0) + b * g.gamma_d);
    Rates {
        n_to_n,
        n_to_f,
        mrc,
        f_to_f: n_to_f.min(mrc),
    }
}

pub fn hd_feasibility(g: &LinkGains, t: &SinrTargets) -> FeasibleBox {
    let (t_n, t_f) = (t.t_n, t.t_f);
    let gbn = g.gamma_bn;
    let (alpha_min, alpha_max) = if gbn > 0.0 {
        (t_n / gbn, 0.5f64.min((gbn - t_f) / (gbn * (t_f + 1.0))))
    } else {
        // Nothing reaches UE_n: only all-zero targets are attainable.
        (
            if t_n > 0.0 { f64::INFINITY } else { 0.0 },
            if t_f > 0.0 { f64::NEG_INFINITY } else { 0.5 },
        )
    };
    // SINR of the direct copy at UE_f with α_n = α_min and every remaining
    // unit of BS power on α_f.
    let direct = if alpha_min.is_finite() {
        (1.0 - alpha_min) * g.gamma_bf / (alpha_min * g.gamma_bf + 1.0)
    } else {
        0.0
    };
    let shortfall = t_f - direct;
    let beta_min = if shortfall <= 0.0 {
        0.0
    } else if g.gamma_d > 0.0 {
        shortfall / g.gamma_d
    } else {
        f64::INFINITY
    };
    let beta_max = 1.0;
    FeasibleBox {
        alpha_min,
        alpha_max,
        beta_min,
        beta_max,
        feasible: alpha_min <= alpha_max && beta_min <= beta_max,
    }
}

/// Vertices of the power LP at `α_n = α_min`, in the order
/// `p1, p2` followed by the budget-clipped variants of each.
/// Returned points are not yet validated.
pub fn hd_candidates(g: &LinkGains, t: &SinrTargets, bx: &FeasibleBox) -> Vec<(f64, f64, f64)> {
    let t_f = t.t_f;
    let a = bx.alpha_min;
    let gbn = g.gamma_bn;
    let lo = if gbn > 0.0 { a.max(a * t_f + t_f / gbn) } else { a };
    let hi = 1.0 - a;
    // Direct-copy SINR per unit of α_f.
    let k = g.gamma_bf / (a * g.gamma_bf + 1.0);
    let beta_for = |af: f64| {
        let need = t_f - af * k;
        if need <= 0.0 {
            0.0
        } else if g.gamma_d > 0.0 {
            need / g.gamma_d
        } else {
            f64::INFINITY
        }
    };
    let mut out = Vec::with_capacity(4);

    let beta1 = beta_for(lo);
    out.push((a, lo, beta1));

    let af2 = if k > 0.0 { (t_f / k).max(lo) } else { f64::INFINITY };
    out.push((a, af2, 0.0));

    if beta1 > 1.0 && k > 0.0 {
        out.push((a, ((t_f - g.gamma_d) / k).max(lo), 1.0));
    }
    if af2 > hi {
        out.push((a, hi, beta_for(hi)));
    }
    out
}

pub fn hd_optimal_power(g: &LinkGains, t: &SinrTargets, budget: &PowerBudget) -> Result<PowerSolution> {
    let bx = hd_feasibility(g, t);
    if !bx.feasible {
        return Err(Error::Infeasible(bx));
    }
    let valid: Vec<PowerSolution> = hd_candidates(g, t, &bx)
        .into_iter()
        .map(|(an, af, b)| PowerSolution::new(an, af, b, budget))
        .filter(|p| satisfies(g, t, p, RATE_TOL))
        .collect();
    match cheapest(&valid) {
        Some(p) => Ok(p),
        None => {
            warn!("no closed-form HD candidate survived validation; grid fallback for {g:?}, {t:?}");
            let p = crate::oracle::grid_search_power(g, t, budget, 1e-3);
            if p.feasible {
                Ok(p)
            } else {
                Err(Error::Infeasible(bx))
            }
        }
    }
}
