//! Small power-versus-RIS-size sweep written to CSV.

use ris_cnoma::experiments::{run_to_csv, ExperimentKind, ExperimentSpec, Scheme};

fn main() -> ris_cnoma::Result<()> {
    let mut spec = ExperimentSpec::new(ExperimentKind::PowerVsElements);
    spec.trials = 20;
    spec.elements = vec![4, 8, 16];
    spec.schemes = vec![Scheme::RisFd, Scheme::RisHd, Scheme::NoFd];
    let out = std::env::temp_dir().join("ris_cnoma_power_vs_elements.csv");
    let (records, _) = run_to_csv(&spec, Some(&out))?;
    for r in &records {
        println!("M = {:>3} {:<8} {:>8.2} dBm, outage {:.2}", r.sweep_value, r.scheme, r.mean_power_dbm, r.outage);
    }
    println!("wrote {}", out.display());
    Ok(())
}
