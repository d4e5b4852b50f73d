//! Closed-form FD power allocation, showing the candidate set and how the
//! self-interference gain moves the optimum.

use ris_cnoma::power::{fd_candidates, fd_feasibility, fd_optimal_power, fd_targets, PowerBudget};
use ris_cnoma::LinkGains;

fn main() {
    let budget = PowerBudget { p_bs: 2.0, p_n: 0.2 };
    let t = fd_targets(1.0, 1.0);
    let g = LinkGains::fd(100.0, 50.0, 20.0, 1.0);
    let bx = fd_feasibility(&g, &t);
    let c = fd_candidates(&g, &t, &bx);
    println!("beta in [{:.5}, {:.5}], kink at {:?}, case {:?}", bx.beta_min, bx.beta_max, c.beta_c, c.region_case);
    for (an, af, beta) in c.points() {
        println!("  candidate ({an:.5}, {af:.5}, {beta:.5}) -> {:.6} W", budget.total(an, af, beta));
    }

    println!("\n{:>8} {:>10} {:>10} {:>10} {:>10}", "gamma_si", "alpha_n", "alpha_f", "beta", "watts");
    for si in [0.0, 1.0, 10.0, 100.0, 1000.0] {
        let g = LinkGains::fd(100.0, 50.0, 20.0, si);
        match fd_optimal_power(&g, &t, &budget) {
            Ok(p) => println!("{si:>8} {:>10.5} {:>10.5} {:>10.5} {:>10.6}", p.alpha_n, p.alpha_f, p.beta, p.total_watts),
            Err(e) => println!("{si:>8} {e}"),
        }
    }
}
