//! Alternating power/phase optimization on a few draws, HD and FD, against
//! the no-RIS baselines.

use std::time::Instant;

use ris_cnoma::alt_opt::{baseline_no_ris, optimize_fd, optimize_hd, AoConfig};
use ris_cnoma::scenario::{generate_realization, watts_to_dbm, ScenarioConfig};
use ris_cnoma::Mode;

fn main() {
    let m: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let cfg = ScenarioConfig::default().with_elements(m);
    let ao = AoConfig::default();
    println!("M = {m}, R_n = {}, R_f = {}", cfg.rate_n, cfg.rate_f);
    for trial in 0..3 {
        let ch = generate_realization(&cfg, trial, 1);
        for (name, mode) in [("hd", Mode::Hd), ("fd", Mode::Fd)] {
            let start = Instant::now();
            let trace = match mode {
                Mode::Hd => optimize_hd(&ch, &cfg, &ao),
                Mode::Fd => optimize_fd(&ch, &cfg, &ao),
            };
            let base = baseline_no_ris(&ch, &cfg, mode);
            let dbm: Vec<String> = trace.objectives.iter().map(|w| format!("{:.2}", watts_to_dbm(*w))).collect();
            println!(
                "trial {trial} {name}: [{}] dBm in {:.1?}; no RIS {:.2} dBm",
                dbm.join(", "),
                start.elapsed(),
                watts_to_dbm(base.total_watts)
            );
        }
    }
}
