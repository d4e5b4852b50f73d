//! One phase update: lift the rate constraints at a fixed power point, solve
//! the max-slack SDP and round it with Gaussian randomization.

use std::time::Instant;

use ris_cnoma::gains::fd_gains;
use ris_cnoma::phase_opt::{align_phases, build_fd_lifting, randomize};
use ris_cnoma::power::{fd_optimal_power, fd_targets, PowerBudget};
use ris_cnoma::scenario::{generate_realization, stream_rng, ScenarioConfig};
use ris_cnoma::sdp::{check_solution, solve_max_slack, SdpMethod, SdpOptions};

fn main() {
    let cfg = ScenarioConfig::default().with_elements(16);
    let ch = generate_realization(&cfg, 3, 7);
    let t = fd_targets(cfg.rate_n, cfg.rate_f);
    let theta = align_phases(ch.h_bf, &ch.h_rf, &ch.h_br);
    let p = fd_optimal_power(&fd_gains(&ch, &theta, &cfg).unwrap(), &t, &PowerBudget::from(&cfg)).expect("feasible draw");
    let lifted = build_fd_lifting(&ch, &p, &t, &cfg);
    println!("power point {:.4} W, margins at current phases {:?}", p.total_watts, lifted.margins(&theta));

    for method in [SdpMethod::Admm, SdpMethod::Bisection] {
        let opts = SdpOptions { method, ..SdpOptions::default() };
        let start = Instant::now();
        let sol = solve_max_slack(&lifted.instance, &opts);
        let report = check_solution(&lifted.instance, &sol);
        println!(
            "{method:?}: slack {:.6} ({:?}, {} iterations, {:.1?}); {report:?}",
            sol.slack,
            sol.status,
            sol.iterations,
            start.elapsed()
        );
        let out = randomize(&sol, &lifted, 1000, &mut stream_rng(7, 3, 64), &theta);
        println!("  rounded min margin {:.6} (incumbent {:.6})", out.min_margin, lifted.min_margin(&theta));
    }
}
