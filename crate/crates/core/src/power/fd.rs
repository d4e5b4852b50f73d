//! Full-duplex relaying: UE_n forwards while it receives, paying for it with
//! self-interference `β γ_si` at its own receiver.
//!
//! With `R_n→n` tight, `α_n` is an affine function of `β`,
//! `α_n(β) = (γ_si t_n/γ_bn) β + t_n/γ_bn`, and the cheapest `α_f` is the
//! upper envelope of three lines in `β`:
//!
//! * `x1`: UE_n must decode UE_f's message before SIC,
//! * `x2`: UE_f's combined SINR must reach `t_f`,
//! * `α_n` itself (SIC ordering).
//!
//! The objective is then convex piecewise linear in `β`, so the optimum sits
//! at an end of the feasible `β` interval or at the kink of the envelope.

use log::warn;
use serde::{Deserialize, Serialize};

use super::{cheapest, log2_1p, satisfies, FeasibleBox, PowerBudget, PowerSolution, Rates, SinrTargets, RATE_TOL};
use crate::error::{Error, Result};
use crate::gains::{LinkGains, Mode};

/// Tolerance under which the `β` coefficient of the combining bound counts
/// as zero.
const COEFF_TOL: f64 = 1e-12;

pub fn fd_targets(r_n: f64, r_f: f64) -> SinrTargets {
    SinrTargets {
        t_n: r_n.exp2() - 1.0,
        t_f: r_f.exp2() - 1.0,
        mode: Mode::Fd,
    }
}

pub fn fd_rates(g: &LinkGains, p: &PowerSolution) -> Rates {
    let (an, af, b) = (p.alpha_n, p.alpha_f, p.beta);
    let si = b * g.gamma_si;
    let n_to_f = log2_1p(af * g.gamma_bn / (an * g.gamma_bn + si + 1.0));
    let n_to_n = log2_1p(an * g.gamma_bn / (si + 1.0));
    let mrc = log2_1p((af * g.gamma_bf + b * g.gamma_d) / (an * g.gamma_bf + 1.0));
    Rates {
        n_to_n,
        n_to_f,
        mrc,
        f_to_f: n_to_f.min(mrc),
    }
}

/// `α_n(β) = slope·β + offset`.
#[derive(Debug, Clone, Copy)]
struct AlphaLine {
    slope: f64,
    offset: f64,
}

impl AlphaLine {
    fn new(g: &LinkGains, t: &SinrTargets) -> Self {
        Self {
            slope: g.gamma_si * t.t_n / g.gamma_bn,
            offset: t.t_n / g.gamma_bn,
        }
    }

    fn at(&self, beta: f64) -> f64 {
        self.slope * beta + self.offset
    }
}

/// Tightens `[lo, hi]` with `k β ≤ n`. Returns false if no `β` satisfies it.
fn apply_halfspace(k: f64, n: f64, zero_tol: f64, lo: &mut f64, hi: &mut f64) -> bool {
    if k > zero_tol {
        *hi = hi.min(n / k);
    } else if k < -zero_tol {
        *lo = lo.max(n / k);
    } else if n < 0.0 {
        return false;
    }
    true
}

pub fn fd_feasibility(g: &LinkGains, t: &SinrTargets) -> FeasibleBox {
    let (t_n, t_f) = (t.t_n, t.t_f);
    if !(g.gamma_bn > 0.0) {
        // UE_n hears nothing; only all-zero targets are attainable.
        let ok = t_n == 0.0 && t_f == 0.0;
        return FeasibleBox {
            alpha_min: if ok { 0.0 } else { f64::INFINITY },
            alpha_max: if ok { 0.0 } else { f64::INFINITY },
            beta_min: 0.0,
            beta_max: if ok { 1.0 } else { f64::NEG_INFINITY },
            feasible: ok,
        };
    }
    let line = AlphaLine::new(g, t);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut ok = true;

    // α_n + x1 ≤ 1, scaled by γ_bn.
    let k2 = g.gamma_si * (t_n * (1.0 + t_f) + t_f);
    let n2 = g.gamma_bn - t_f - t_n * (1.0 + t_f);
    ok &= apply_halfspace(k2, n2, 0.0, &mut lo, &mut hi);

    // α_n + x2 ≤ 1, scaled by γ_bf (also valid when γ_bf = 0, where it
    // reduces to β γ_d ≥ t_f).
    let c1 = g.gamma_bf / g.gamma_bn * (1.0 + t_f) * t_n * g.gamma_si;
    let c2 = g.gamma_d;
    let n3 = g.gamma_bf - t_f - g.gamma_bf * (1.0 + t_f) * t_n / g.gamma_bn;
    ok &= apply_halfspace(c1 - c2, n3, COEFF_TOL * c1.max(c2).max(1.0), &mut lo, &mut hi);

    let alpha_min = line.at(lo);
    let alpha_max = line.at(hi);
    FeasibleBox {
        alpha_min,
        alpha_max,
        beta_min: lo,
        beta_max: hi,
        feasible: ok && lo <= hi && alpha_min <= 0.5,
    }
}

/// Which entries of `(min, 0, max)` the candidate table keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionCase {
    /// `α_0 ≤ ½` and `α_max ≤ ½`: min, 0 and max.
    AllWithinHalf,
    /// `α_0 ≤ ½ < α_max`: min and 0.
    UpperBeyondHalf,
    /// `α_max ≤ ½ < α_0`: min and max.
    KinkBeyondHalf,
    /// Both beyond ½: min only.
    BothBeyondHalf,
}

/// Candidate vertices of the FD power problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdCandidateSet {
    pub alpha_n: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha_f: Vec<f64>,
    pub region_case: RegionCase,
    /// Kink of the `α_f` envelope, before clamping to `[β_min, β_max]`.
    pub beta_c: f64,
    /// Extra vertex where `α_n` reaches ½ inside `[β_min, β_max]`, present
    /// only when the table drops the upper end for exceeding ½.
    pub half_point: Option<(f64, f64, f64)>,
}

impl FdCandidateSet {
    /// Number of table entries.
    pub fn len(&self) -> usize {
        self.alpha_n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_n.is_empty()
    }

    /// Table entries followed by the half point, as `(α_n, α_f, β)`.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut pts: Vec<_> = (0..self.len())
            .map(|i| (self.alpha_n[i], self.alpha_f[i], self.beta[i]))
            .collect();
        pts.extend(self.half_point);
        pts
    }
}

/// Lower-envelope value of `α_f` at `(α_n, β)`.
fn alpha_f_at(g: &LinkGains, t: &SinrTargets, alpha_n: f64, beta: f64) -> f64 {
    let x1 = t.t_f * alpha_n + g.gamma_si * t.t_f / g.gamma_bn * beta + t.t_f / g.gamma_bn;
    let x2 = if g.gamma_bf > 0.0 {
        t.t_f * alpha_n - g.gamma_d / g.gamma_bf * beta + t.t_f / g.gamma_bf
    } else {
        f64::NEG_INFINITY
    };
    x1.max(x2).max(alpha_n).max(0.0)
}

/// `β` where the rising part of the envelope (`x1`, or `α_n` when SIC
/// dominates) meets the falling line `x2`.
fn kink(g: &LinkGains, t: &SinrTargets) -> f64 {
    let (t_n, t_f) = (t.t_n, t.t_f);
    // Along α_n(β): x1 = t_f(1+t_n)(γ_si β+1)/γ_bn and α_n = t_n(γ_si β+1)/γ_bn.
    // `e` is the rising line's coefficient minus the t_f·α_n share of x2.
    let e = t_n.max(t_f * (1.0 + t_n)) - t_f * t_n;
    let den = e * g.gamma_bf * g.gamma_si + g.gamma_bn * g.gamma_d;
    if den > 0.0 && g.gamma_bf > 0.0 {
        (g.gamma_bn * t_f - e * g.gamma_bf) / den
    } else {
        f64::NAN
    }
}

pub fn fd_candidates(g: &LinkGains, t: &SinrTargets, bx: &FeasibleBox) -> FdCandidateSet {
    let line = AlphaLine::new(g, t);
    let beta_c = kink(g, t);
    let (beta_0, alpha_0) = if beta_c < bx.beta_min {
        (bx.beta_min, bx.alpha_min)
    } else if beta_c >= bx.beta_min && beta_c <= bx.beta_max {
        (beta_c, line.at(beta_c))
    } else {
        (bx.beta_max, bx.alpha_max)
    };
    let (region_case, betas) = match (alpha_0 <= 0.5, bx.alpha_max <= 0.5) {
        (true, true) => (RegionCase::AllWithinHalf, vec![bx.beta_min, beta_0, bx.beta_max]),
        (true, false) => (RegionCase::UpperBeyondHalf, vec![bx.beta_min, beta_0]),
        (false, true) => (RegionCase::KinkBeyondHalf, vec![bx.beta_min, bx.beta_max]),
        (false, false) => (RegionCase::BothBeyondHalf, vec![bx.beta_min]),
    };
    let alpha_n: Vec<f64> = betas.iter().map(|&b| line.at(b)).collect();
    let alpha_f = alpha_n
        .iter()
        .zip(&betas)
        .map(|(&an, &b)| alpha_f_at(g, t, an, b))
        .collect();

    let half_point = (bx.alpha_max > 0.5 && line.slope > 0.0)
        .then(|| (0.5 - line.offset) / line.slope)
        .filter(|b| (bx.beta_min..=bx.beta_max).contains(b))
        .map(|b| (0.5, alpha_f_at(g, t, 0.5, b), b));

    FdCandidateSet {
        alpha_n,
        beta: betas,
        alpha_f,
        region_case,
        beta_c,
        half_point,
    }
}

pub fn fd_optimal_power(g: &LinkGains, t: &SinrTargets, budget: &PowerBudget) -> Result<PowerSolution> {
    let bx = fd_feasibility(g, t);
    if !bx.feasible {
        return Err(Error::Infeasible(bx));
    }
    if !(g.gamma_bn > 0.0) {
        return Ok(PowerSolution::new(0.0, 0.0, 0.0, budget));
    }
    let valid: Vec<PowerSolution> = fd_candidates(g, t, &bx)
        .points()
        .into_iter()
        .map(|(an, af, b)| PowerSolution::new(an, af, b, budget))
        .filter(|p| satisfies(g, t, p, RATE_TOL))
        .collect();
    match cheapest(&valid) {
        Some(p) => Ok(p),
        None => {
            warn!("no closed-form FD candidate survived validation; grid fallback for {g:?}, {t:?}");
            let p = crate::oracle::grid_search_power(g, t, budget, 1e-3);
            if p.feasible {
                Ok(p)
            } else {
                Err(Error::Infeasible(bx))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const B: PowerBudget = PowerBudget { p_bs: 2.0, p_n: 0.2 };

    fn t11() -> SinrTargets {
        fd_targets(1.0, 1.0)
    }

    #[test]
    fn targets() {
        assert_eq!(fd_targets(1.0, 2.0).t_n, 1.0);
        assert_eq!(fd_targets(1.0, 2.0).t_f, 3.0);
        assert_eq!(fd_targets(0.0, 0.0).t_f, 0.0);
    }

    #[test]
    fn rates_examples() {
        let g = LinkGains::fd(100.0, 50.0, 20.0, 1.0);
        let r = fd_rates(&g, &PowerSolution::new(0.0, 0.0, 0.0, &B));
        assert_eq!((r.n_to_n, r.n_to_f, r.mrc), (0.0, 0.0, 0.0));
        let r = fd_rates(&g, &PowerSolution::new(0.01, 0.03, 0.0, &B));
        assert!((r.n_to_n - 1.0).abs() < 1e-12);
        assert!((r.mrc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        let bx = fd_feasibility(&LinkGains::fd(100.0, 50.0, 20.0, 1.0), &t11());
        assert!(bx.feasible);
        assert_eq!((bx.beta_min, bx.beta_max), (0.0, 1.0));
        assert!((bx.alpha_min - 0.01).abs() < 1e-15);

        let bx = fd_feasibility(&LinkGains::fd(1.5, 50.0, 20.0, 0.0), &t11());
        assert!(!bx.feasible);
        assert!(bx.alpha_min > 0.5);

        let bx = fd_feasibility(&LinkGains::fd(100.0, 50.0, 20.0, 3.0), &fd_targets(0.0, 0.0));
        assert!(bx.feasible);
        assert_eq!((bx.alpha_min, bx.beta_min, bx.beta_max), (0.0, 0.0, 1.0));

        assert!(!fd_feasibility(&LinkGains::fd(0.0, 50.0, 20.0, 0.0), &t11()).feasible);
    }

    #[test]
    fn equal_combining_coefficients_need_nonnegative_numerator() {
        // c1 = (γ_bf/γ_bn)(1+t_f) t_n γ_si = 0.5·2·1·2 = 2 = γ_d.
        let t = t11();
        assert!(fd_feasibility(&LinkGains::fd(100.0, 50.0, 2.0, 2.0), &t).feasible);
        // Same balance with a direct link too weak for t_f on its own.
        let g = LinkGains::fd(100.0, 0.5, 0.02, 2.0);
        assert!(!fd_feasibility(&g, &t).feasible);
    }

    #[test]
    fn candidate_table_uses_the_envelope_kink() {
        let g = LinkGains::fd(100.0, 50.0, 20.0, 1.0);
        let t = t11();
        let bx = fd_feasibility(&g, &t);
        let c = fd_candidates(&g, &t, &bx);
        // x1 = x2 at β = t_f(1 − γ_bf/γ_bn)/((γ_bf/γ_bn) γ_si t_f + γ_d) = 1/41.
        assert!((c.beta_c - 1.0 / 41.0).abs() < 1e-15);
        assert_eq!(c.region_case, RegionCase::AllWithinHalf);
        assert_eq!(c.len(), 3);
        let expect = [(0.01, 0.03, 0.0), (0.42 / 41.0, 0.84 / 41.0, 1.0 / 41.0), (0.02, 0.04, 1.0)];
        for (got, want) in c.points().iter().zip(expect) {
            assert!((got.0 - want.0).abs() < 1e-15, "{got:?} vs {want:?}");
            assert!((got.1 - want.1).abs() < 1e-15, "{got:?} vs {want:?}");
            assert!((got.2 - want.2).abs() < 1e-15, "{got:?} vs {want:?}");
        }
        for i in 0..c.len() {
            let line = AlphaLine::new(&g, &t);
            assert!((c.alpha_n[i] - line.at(c.beta[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_direct_links_put_the_kink_at_zero() {
        let g = LinkGains::fd(80.0, 80.0, 20.0, 2.0);
        let c = fd_candidates(&g, &t11(), &fd_feasibility(&g, &t11()));
        assert_eq!(c.beta_c, 0.0);
    }

    #[test]
    fn without_self_interference_alpha_n_is_flat() {
        let g = LinkGains::fd(100.0, 50.0, 20.0, 0.0);
        let bx = fd_feasibility(&g, &t11());
        assert_eq!(bx.alpha_min, bx.alpha_max);
        assert!((bx.alpha_min - 0.01).abs() < 1e-15);
    }

    #[test]
    fn optimum_examples() {
        let p = fd_optimal_power(&LinkGains::fd(100.0, 50.0, 20.0, 1.0), &t11(), &B).unwrap();
        assert!((p.alpha_n - 0.42 / 41.0).abs() < 1e-12);
        assert!((p.alpha_f - 0.84 / 41.0).abs() < 1e-12);
        assert!((p.beta - 1.0 / 41.0).abs() < 1e-12);
        assert!((p.total_watts - 2.72 / 41.0).abs() < 1e-12);

        let p = fd_optimal_power(&LinkGains::fd(3.0, 50.0, 20.0, 10.0), &t11(), &B).unwrap();
        assert!((p.alpha_n - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.alpha_f - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(p.beta, 0.0);
        assert!((p.total_watts - 2.0).abs() < 1e-12);
        let c = fd_candidates(
            &LinkGains::fd(3.0, 50.0, 20.0, 10.0),
            &t11(),
            &fd_feasibility(&LinkGains::fd(3.0, 50.0, 20.0, 10.0), &t11()),
        );
        assert!(c.points().iter().all(|q| (q.0 - 1.0 / 3.0).abs() < 1e-12 && q.2 == 0.0));

        let p = fd_optimal_power(&LinkGains::fd(3.0, 5.0, 2.0, 1.0), &fd_targets(0.0, 0.0), &B).unwrap();
        assert_eq!((p.alpha_n, p.alpha_f, p.beta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn sic_dominated_envelope() {
        // t_n > t_f (1 + t_n): α_n itself is the binding lower bound on α_f.
        let t = fd_targets(2.0, 0.3);
        assert!(t.t_n > t.t_f * (1.0 + t.t_n));
        let g = LinkGains::fd(40.0, 2.0, 30.0, 5.0);
        let p = fd_optimal_power(&g, &t, &B).unwrap();
        assert!(satisfies(&g, &t, &p, RATE_TOL));
        assert!(p.alpha_f >= p.alpha_n);
    }

    fn instance() -> impl Strategy<Value = (LinkGains, SinrTargets)> {
        (
            0.0..4.0f64,
            0.0..4.0f64,
            0.0..4.0f64,
            0.0..10.0f64,
            prop::sample::select(vec![0.5, 1.0, 2.0]),
            prop::sample::select(vec![0.5, 1.0, 2.0]),
        )
            .prop_map(|(a, b, c, si, rn, rf)| {
                (LinkGains::fd(10f64.powf(a), 10f64.powf(b), 10f64.powf(c), si), fd_targets(rn, rf))
            })
    }

    proptest! {
        #[test]
        fn optimum_is_feasible_and_tight((g, t) in instance()) {
            let bx = fd_feasibility(&g, &t);
            match fd_optimal_power(&g, &t, &B) {
                Ok(p) => {
                    prop_assert!(bx.feasible);
                    prop_assert!(satisfies(&g, &t, &p, RATE_TOL));
                    let r = fd_rates(&g, &p);
                    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9;
                    prop_assert!(close(r.n_to_n, t.rate_n()) || close(r.n_to_f, t.rate_f()) || close(r.mrc, t.rate_f()));
                }
                Err(_) => prop_assert!(!bx.feasible),
            }
        }

        #[test]
        fn candidates_lie_on_the_alpha_line((g, t) in instance()) {
            let bx = fd_feasibility(&g, &t);
            prop_assume!(bx.feasible);
            let c = fd_candidates(&g, &t, &bx);
            let expected_len = match c.region_case {
                RegionCase::AllWithinHalf => 3,
                RegionCase::UpperBeyondHalf | RegionCase::KinkBeyondHalf => 2,
                RegionCase::BothBeyondHalf => 1,
            };
            prop_assert_eq!(c.len(), expected_len);
            let line = AlphaLine::new(&g, &t);
            for i in 0..c.len() {
                prop_assert!((c.alpha_n[i] - line.at(c.beta[i])).abs() <= 1e-12);
                prop_assert!(c.beta[i] >= bx.beta_min && c.beta[i] <= bx.beta_max);
                prop_assert!(c.alpha_f[i] >= c.alpha_n[i]);
            }
        }
    }
}
