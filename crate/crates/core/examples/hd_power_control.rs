//! Closed-form HD power allocation on a few fixed gain triples.

use ris_cnoma::power::{hd_candidates, hd_feasibility, hd_optimal_power, hd_rates, hd_targets, PowerBudget};
use ris_cnoma::LinkGains;

fn main() {
    let budget = PowerBudget { p_bs: 2.0, p_n: 0.2 };
    let t = hd_targets(1.0, 1.0);
    for (bn, bf, d) in [(100.0, 50.0, 20.0), (100.0, 5.0, 50.0), (20.0, 1.0, 0.5), (4.0, 50.0, 20.0)] {
        let g = LinkGains::hd(bn, bf, d);
        let bx = hd_feasibility(&g, &t);
        println!("gains (bn {bn}, bf {bf}, d {d})");
        println!("  alpha_n in [{:.4}, {:.4}], beta >= {:.4}, feasible {}", bx.alpha_min, bx.alpha_max, bx.beta_min, bx.feasible);
        if !bx.feasible {
            continue;
        }
        for (an, af, beta) in hd_candidates(&g, &t, &bx) {
            println!("  candidate ({an:.5}, {af:.5}, {beta:.5}) -> {:.6} W", budget.total(an, af, beta));
        }
        let p = hd_optimal_power(&g, &t, &budget).expect("gate said feasible");
        let r = hd_rates(&g, &p);
        println!("  optimum {:.6} W; rates n {:.4}, n->f {:.4}, mrc {:.4}", p.total_watts, r.n_to_n, r.n_to_f, r.mrc);
    }
}
