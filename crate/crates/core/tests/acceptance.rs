//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Pass a substring (e.g. `c3`) to run a subset.

use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use ris_cnoma::alt_opt::{optimize_fd, optimize_hd, AoConfig, AoTrace};
use ris_cnoma::experiments::{run_scheme, Scheme, TrialOutcome};
use ris_cnoma::gains::{combined_amplitude, combined_gain};
use ris_cnoma::linalg::{trace_product, CMatrix};
use ris_cnoma::oracle::{grid_has_feasible_point, grid_search_power};
use ris_cnoma::phase_opt::{cascade_matrix, ct_phase_alignment, lifting_vector};
use ris_cnoma::power::{
    fd_optimal_power, fd_targets, feasibility, hd_optimal_power, hd_targets, optimal_power, satisfies, FeasibleBox,
    PowerBudget, RATE_TOL,
};
use ris_cnoma::scenario::{db_to_linear, generate_realization, sample_rayleigh, stream_rng, watts_to_dbm};
use ris_cnoma::sdp::{check_solution, real_matrix, solve_max_slack, SdpInstance, SdpOptions, TraceConstraint};
use ris_cnoma::{LinkGains, Mode, PhaseVector, PowerSolution, ScenarioConfig, SinrTargets};

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const UNIT_BUDGET: PowerBudget = PowerBudget { p_bs: 2.0, p_n: 0.2 };

fn random_instance(rng: &mut impl Rng, mode: Mode) -> (LinkGains, SinrTargets) {
    let mut gain = || 10f64.powf(rng.random_range(0.0..4.0));
    let (bn, bf, d) = (gain(), gain(), gain());
    let levels = [0.5, 1.0, 2.0];
    let r_n = levels[rng.random_range(0..3)];
    let r_f = levels[rng.random_range(0..3)];
    match mode {
        Mode::Hd => (LinkGains::hd(bn, bf, d), hd_targets(r_n, r_f)),
        Mode::Fd => (LinkGains::fd(bn, bf, d, rng.random_range(0.0..10.0)), fd_targets(r_n, r_f)),
    }
}

fn c1_closed_form_vs_oracle() -> Verdict {
    let step = 1e-3;
    let allowance = (2.0 * UNIT_BUDGET.p_bs + UNIT_BUDGET.p_n) * step;
    let mut rng = stream_rng(101, 0, 0);
    let mut worst_gap = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let mut grid_empty = 0;
    for mode in [Mode::Hd, Mode::Fd] {
        let mut found = 0;
        while found < 100 {
            let (g, t) = random_instance(&mut rng, mode);
            let Ok(p) = optimal_power(&g, &t, &UNIT_BUDGET) else { continue };
            found += 1;
            if !satisfies(&g, &t, &p, RATE_TOL) {
                failures.push(format!("{mode:?} {g:?}: closed form violates its rates"));
            }
            let grid = grid_search_power(&g, &t, &UNIT_BUDGET, step);
            if !grid.feasible {
                grid_empty += 1;
                continue;
            }
            let gap = p.total_watts - grid.total_watts;
            worst_gap = worst_gap.max(gap);
            if gap > allowance {
                failures.push(format!("{mode:?} {g:?}: closed {} vs grid {}", p.total_watts, grid.total_watts));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "200 instances, worst closed-minus-grid {worst_gap:.3e} W (allowed {allowance:.1e}), {grid_empty} with no grid point{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

/// Narrowest extent of the gate's region along `α_n` or `β`.
fn box_width(bx: &FeasibleBox, mode: Mode) -> f64 {
    match mode {
        Mode::Hd => (bx.alpha_max - bx.alpha_min).min(bx.beta_max - bx.beta_min),
        Mode::Fd => {
            // α_n rises linearly in β; cut the β range where α_n reaches ½.
            let hi = if bx.alpha_max > 0.5 && bx.alpha_max > bx.alpha_min {
                bx.beta_min + (bx.beta_max - bx.beta_min) * (0.5 - bx.alpha_min) / (bx.alpha_max - bx.alpha_min)
            } else {
                bx.beta_max
            };
            let alpha_hi = bx.alpha_max.min(0.5);
            (hi - bx.beta_min).min(alpha_hi - bx.alpha_min).max(0.0)
        }
    }
}

fn c2_feasibility_gate() -> Verdict {
    let step = 1e-3;
    let mut rng = stream_rng(202, 0, 0);
    let (mut agree, mut near, mut bad) = (0, 0, Vec::new());
    for i in 0..1000 {
        let mode = if i % 2 == 0 { Mode::Hd } else { Mode::Fd };
        let (g, t) = random_instance(&mut rng, mode);
        let bx = feasibility(&g, &t);
        let grid = grid_has_feasible_point(&g, &t, step);
        match (bx.feasible, grid) {
            (a, b) if a == b => agree += 1,
            (true, false) if box_width(&bx, mode) < step => near += 1,
            _ => bad.push(format!("{mode:?} {g:?} t=({}, {}): gate {} grid {grid}, width {:.2e}", t.t_n, t.t_f, bx.feasible, box_width(&bx, mode))),
        }
    }
    check(
        bad.is_empty(),
        format!(
            "1000 instances: {agree} agree, {near} differ within one grid step, {} differ elsewhere{}",
            bad.len(),
            bad.first().map(|s| format!(" (e.g. {s})")).unwrap_or_default()
        ),
    )
}

fn worked_example(g: LinkGains, t: SinrTargets, expected: f64) -> Verdict {
    let p = match t.mode {
        Mode::Hd => hd_optimal_power(&g, &t, &UNIT_BUDGET),
        Mode::Fd => fd_optimal_power(&g, &t, &UNIT_BUDGET),
    }
    .map_err(|e| format!("closed form failed: {e}"))?;
    // Every stated optimum coordinate (0.03, 0.12, 1/3, 2/3, ...) lies on
    // this grid; the FD 2 W region is the single point (1/3, 2/3, 0).
    let step = 1.0 / 3000.0;
    let grid = grid_search_power(&g, &t, &UNIT_BUDGET, step);
    let allowance = (2.0 * UNIT_BUDGET.p_bs + UNIT_BUDGET.p_n) * step;
    let confirmed = grid.feasible && p.total_watts <= grid.total_watts + 1e-12 && grid.total_watts - p.total_watts <= allowance;
    let matches = (p.total_watts - expected).abs() <= 1e-6;
    check(
        confirmed && matches && satisfies(&g, &t, &p, RATE_TOL),
        format!(
            "closed form {:.9} W at ({:.6}, {:.6}, {:.6}), grid(1/3000) {:.6} W, expected {expected} W",
            p.total_watts, p.alpha_n, p.alpha_f, p.beta, grid.total_watts
        ),
    )
}

fn c3a_hd_0306() -> Verdict {
    worked_example(LinkGains::hd(100.0, 50.0, 20.0), hd_targets(1.0, 1.0), 0.306)
}

fn c3b_hd_0310() -> Verdict {
    worked_example(LinkGains::hd(100.0, 5.0, 50.0), hd_targets(1.0, 1.0), 0.309_913_043_478_260_9)
}

fn c3c_fd_008() -> Verdict {
    worked_example(LinkGains::fd(100.0, 50.0, 20.0, 1.0), fd_targets(1.0, 1.0), 0.08)
}

fn c3d_fd_2w() -> Verdict {
    worked_example(LinkGains::fd(3.0, 50.0, 20.0, 10.0), fd_targets(1.0, 1.0), 2.0)
}

fn c4_ao_convergence() -> Verdict {
    let cfg = ScenarioConfig::default().with_elements(16);
    let ao = AoConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for mode in [Mode::Hd, Mode::Fd] {
        let traces: Vec<AoTrace> = (0..50)
            .map(|trial| {
                let ch = generate_realization(&cfg, trial, 1);
                let ao = AoConfig { rng_seed: trial, ..ao.clone() };
                match mode {
                    Mode::Hd => optimize_hd(&ch, &cfg, &ao),
                    Mode::Fd => optimize_fd(&ch, &cfg, &ao),
                }
            })
            .collect();
        let feasible: Vec<&AoTrace> = traces.iter().filter(|t| t.is_feasible()).collect();
        let monotone = feasible.iter().all(|t| t.objectives.windows(2).all(|w| w[1] <= w[0]));
        let stalled = feasible.iter().filter(|t| t.converged && t.iterations <= 10).count();
        let share = stalled as f64 / feasible.len().max(1) as f64;
        let mean_iters = feasible.iter().map(|t| t.iterations as f64).sum::<f64>() / feasible.len().max(1) as f64;
        ok &= monotone && share >= 0.9 && !feasible.is_empty();
        lines.push(format!(
            "{mode:?}: {}/50 feasible, monotone {monotone}, stalled within 10 in {:.0}%, mean {mean_iters:.2} iterations",
            feasible.len(),
            100.0 * share
        ));
    }
    check(ok, lines.join("; "))
}

/// AO outcomes per (scheme, M, Ω_SI dB), extended on demand.
#[derive(Default)]
struct Runs {
    cache: HashMap<(Scheme, usize, i64), Vec<TrialOutcome>>,
}

impl Runs {
    fn get(&mut self, scheme: Scheme, m: usize, omega_db: f64, trials: usize) -> &[TrialOutcome] {
        let mut cfg = ScenarioConfig::default().with_elements(m);
        cfg.omega_si = db_to_linear(omega_db);
        cfg.rate_f = 2.0;
        let runs = self.cache.entry((scheme, m, omega_db.round() as i64)).or_default();
        while runs.len() < trials {
            let trial = runs.len() as u64;
            let ch = generate_realization(&cfg, trial, 1);
            let ao = AoConfig { rng_seed: trial, ..AoConfig::default() };
            runs.push(run_scheme(&ch, &cfg, scheme, &ao));
        }
        &runs[..trials]
    }

    /// Mean over feasible trials of `f`, and the feasible count.
    fn mean(&mut self, scheme: Scheme, m: usize, omega_db: f64, trials: usize, f: impl Fn(&PowerSolution) -> f64) -> (f64, usize) {
        let xs: Vec<f64> = self.get(scheme, m, omega_db, trials).iter().filter(|o| o.power.feasible).map(|o| f(&o.power)).collect();
        (xs.iter().sum::<f64>() / xs.len() as f64, xs.len())
    }

    fn mean_dbm(&mut self, scheme: Scheme, m: usize, omega_db: f64, trials: usize) -> f64 {
        watts_to_dbm(self.mean(scheme, m, omega_db, trials, |p| p.total_watts).0)
    }
}

fn c5_scheme_ordering(runs: &mut Runs) -> Verdict {
    let fd = runs.mean_dbm(Scheme::RisFd, 32, -100.0, 200);
    let hd = runs.mean_dbm(Scheme::RisHd, 32, -100.0, 200);
    let nofd = runs.mean_dbm(Scheme::NoFd, 32, -100.0, 200);
    check(
        hd - fd > 0.5 && nofd - fd > 0.5,
        format!("ris-fd {fd:.2} dBm, ris-hd {hd:.2} dBm (gap {:.2} dB), nofd {nofd:.2} dBm (gap {:.2} dB)", hd - fd, nofd - fd),
    )
}

fn c6_monotone_in_elements(runs: &mut Runs) -> Verdict {
    let ms = [8, 16, 32];
    let mut ok = true;
    let mut lines = Vec::new();
    for scheme in [Scheme::RisFd, Scheme::RisHd] {
        let w: Vec<f64> = ms.iter().map(|&m| runs.mean(scheme, m, -100.0, 50, |p| p.total_watts).0).collect();
        ok &= w.windows(2).all(|p| p[1] <= p[0]);
        lines.push(format!("{}: {:?} dBm", scheme.name(), w.iter().map(|x| (watts_to_dbm(*x) * 100.0).round() / 100.0).collect::<Vec<_>>()));
    }
    let w: Vec<f64> = ms.iter().map(|&m| runs.mean(Scheme::NoFd, m, -100.0, 50, |p| p.total_watts).0).collect();
    let spread = w.iter().fold(0.0f64, |a, x| a.max((x - w[0]).abs() / w[0]));
    ok &= spread <= 1e-9;
    lines.push(format!("nofd relative spread {spread:.1e}"));
    check(ok, lines.join("; "))
}

fn c7_si_sensitivity(runs: &mut Runs) -> Verdict {
    let grid = [-110.0, -100.0, -90.0, -80.0];
    let rise = |runs: &mut Runs, s| {
        let v: Vec<f64> = grid.iter().map(|&o| runs.mean_dbm(s, 32, o, 50)).collect();
        (v[3] - v[0], v)
    };
    let (fd, fd_v) = rise(runs, Scheme::RisFd);
    let (nofd, nofd_v) = rise(runs, Scheme::NoFd);
    let r = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    check(
        nofd > fd,
        format!("rise -110 to -80 dB: nofd {nofd:.2} dB [{}], ris-fd {fd:.2} dB [{}]", r(&nofd_v), r(&fd_v)),
    )
}

fn c8_power_split(runs: &mut Runs) -> Verdict {
    let budget = PowerBudget::from(&ScenarioConfig::default());
    let mut ok = true;
    let mut lines = Vec::new();
    for m in [16, 32] {
        let (ue_lo, _) = runs.mean(Scheme::RisFd, m, -100.0, 50, |p| p.relay_watts(&budget));
        let (ue_hi, _) = runs.mean(Scheme::RisFd, m, -90.0, 50, |p| p.relay_watts(&budget));
        let (bs_lo, _) = runs.mean(Scheme::RisFd, m, -100.0, 50, |p| p.bs_watts(&budget));
        let (bs_hi, _) = runs.mean(Scheme::RisFd, m, -90.0, 50, |p| p.bs_watts(&budget));
        ok &= ue_hi <= ue_lo && bs_hi >= bs_lo;
        lines.push(format!(
            "M={m}: UE_n {:.2} -> {:.2} dBm, BS {:.2} -> {:.2} dBm",
            watts_to_dbm(ue_lo),
            watts_to_dbm(ue_hi),
            watts_to_dbm(bs_lo),
            watts_to_dbm(bs_hi)
        ));
    }
    check(ok, lines.join("; "))
}

fn c9_sdp_suite() -> Verdict {
    let single = |a: CMatrix, b: f64| SdpInstance::new(a.nrows(), vec![TraceConstraint { a, b }]).unwrap();
    let cases = [
        (single(real_matrix(&[&[2.0]]), 1.0), 1.0),
        (single(real_matrix(&[&[0.0, 0.5], &[0.5, 0.0]]), 0.0), 1.0),
        (single(CMatrix::identity(2, 2), 3.0), -1.0),
    ];
    let opts = SdpOptions::default();
    let mut ok = true;
    let mut slacks = Vec::new();
    for (inst, want) in &cases {
        let sol = solve_max_slack(inst, &opts);
        let rep = check_solution(inst, &sol);
        ok &= (sol.slack - want).abs() <= 1e-4 && rep.min_eigenvalue >= -1e-8 && rep.max_diag_deviation <= 1e-6;
        slacks.push(format!("{:.6}", sol.slack));
    }
    let mut worst = 0.0f64;
    let mut rng = stream_rng(909, 0, 0);
    for _ in 0..50 {
        let m = rng.random_range(1..=16);
        let h_rx = sample_rayleigh(m, 1.0, &mut rng);
        let h_tx = sample_rayleigh(m, 1.0, &mut rng);
        let h_d = sample_rayleigh(1, 1.0, &mut rng)[0];
        let theta = PhaseVector::new((0..m).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect());
        let x = nalgebra::DVector::from_vec(lifting_vector(&theta));
        let lifted = trace_product(&cascade_matrix(h_d, &h_rx, &h_tx), &(&x * x.adjoint())) + h_d.norm_sqr();
        let direct = combined_gain(h_d, &h_rx, &theta, &h_tx).unwrap();
        worst = worst.max((lifted - direct).abs() / direct.max(1.0));
    }
    ok &= worst <= 1e-10;
    check(ok, format!("hand slacks [{}] vs [1, 1, -1]; lifting identity worst error {worst:.1e} on 50 pairs", slacks.join(", ")))
}

fn c10_ct_alignment() -> Verdict {
    let mut rng = stream_rng(1010, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(1..=64);
        let h_nf = sample_rayleigh(1, 1.0, &mut rng)[0];
        let h_nr = sample_rayleigh(m, 1.0, &mut rng);
        let h_rf = sample_rayleigh(m, 1.0, &mut rng);
        let theta = ct_phase_alignment(h_nf, &h_nr, &h_rf);
        let got = combined_amplitude(h_nf, &h_rf, &theta, &h_nr).unwrap().norm();
        let bound = h_nf.norm() + h_nr.iter().zip(&h_rf).map(|(a, b)| a.norm() * b.norm()).sum::<f64>();
        worst = worst.max((got - bound).abs() / bound);
    }
    let mut beaten = 0;
    for trial in 0..10 {
        let m = 1 + trial % 8;
        let h_nf: Complex64 = sample_rayleigh(1, 1.0, &mut rng)[0];
        let h_nr = sample_rayleigh(m, 1.0, &mut rng);
        let h_rf = sample_rayleigh(m, 1.0, &mut rng);
        let best = combined_gain(h_nf, &h_rf, &ct_phase_alignment(h_nf, &h_nr, &h_rf), &h_nr).unwrap();
        for _ in 0..1000 {
            let theta = PhaseVector::new((0..m).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect());
            if combined_gain(h_nf, &h_rf, &theta, &h_nr).unwrap() > best * (1.0 + 1e-12) {
                beaten += 1;
            }
        }
    }
    check(
        worst <= 1e-12 && beaten == 0,
        format!("coherent-sum worst relative error {worst:.1e} on 1000 channels; {beaten} of 10^4 random draws beat it"),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut runs = Runs::default();
    #[allow(clippy::type_complexity)]
    let criteria: Vec<(&str, &str, Box<dyn FnOnce(&mut Runs) -> Verdict>)> = vec![
        ("c1", "closed-form optimality vs grid oracle", Box::new(|_| c1_closed_form_vs_oracle())),
        ("c2", "feasibility gate exactness", Box::new(|_| c2_feasibility_gate())),
        ("c3a", "worked example HD 0.306 W", Box::new(|_| c3a_hd_0306())),
        ("c3b", "worked example HD 0.3099 W", Box::new(|_| c3b_hd_0310())),
        ("c3c", "worked example FD 0.08 W", Box::new(|_| c3c_fd_008())),
        ("c3d", "worked example FD 2 W", Box::new(|_| c3d_fd_2w())),
        ("c4", "AO convergence at M=16", Box::new(|_| c4_ao_convergence())),
        ("c5", "scheme ordering at M=32", Box::new(c5_scheme_ordering)),
        ("c6", "monotonicity in M", Box::new(c6_monotone_in_elements)),
        ("c7", "SI sensitivity", Box::new(c7_si_sensitivity)),
        ("c8", "power split trend", Box::new(c8_power_split)),
        ("c9", "SDP unit suite", Box::new(|_| c9_sdp_suite())),
        ("c10", "CT alignment identity", Box::new(|_| c10_ct_alignment())),
    ];
    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let verdict = run(&mut runs);
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(d) => println!("PASS {id:<4} {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                println!("FAIL {id:<4} {name}: {d} [{secs:.1}s]");
                failed.push(id);
            }
        }
    }
    println!("acceptance: {} of {ran} criteria passed{}", ran - failed.len(), if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join(", ")) });
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
