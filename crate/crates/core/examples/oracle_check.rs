//! Compares the closed-form optimum with the exhaustive grid on random gains.

use rand::Rng;
use ris_cnoma::oracle::grid_search_power;
use ris_cnoma::power::{fd_targets, hd_targets, optimal_power, PowerBudget};
use ris_cnoma::scenario::stream_rng;
use ris_cnoma::LinkGains;

fn main() {
    let budget = PowerBudget { p_bs: 2.0, p_n: 0.2 };
    let step = 1e-3;
    let slack = (2.0 * budget.p_bs + budget.p_n) * step;
    let mut rng = stream_rng(5, 0, 0);
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..20 {
        let mut gain = || 10f64.powf(rng.random_range(0.0..4.0));
        let (bn, bf, d) = (gain(), gain(), gain());
        let (g, t) = if i % 2 == 0 {
            (LinkGains::hd(bn, bf, d), hd_targets(1.0, 1.0))
        } else {
            (LinkGains::fd(bn, bf, d, rng.random_range(0.0..10.0)), fd_targets(1.0, 1.0))
        };
        let grid = grid_search_power(&g, &t, &budget, step);
        match optimal_power(&g, &t, &budget) {
            Ok(p) => {
                worst = worst.max(p.total_watts - grid.total_watts);
                println!("{:?} closed {:.6} W, grid {:.6} W", t.mode, p.total_watts, grid.total_watts);
            }
            Err(_) => println!("{:?} infeasible (grid finds a point: {})", t.mode, grid.feasible),
        }
    }
    println!("largest closed-minus-grid gap {worst:.2e} W (allowed {slack:.2e})");
}
