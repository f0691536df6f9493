//! Random quadratic perturbations of the linear path: how often does a
//! random envelope `s(1-s) c_j` open the gap, and what does it do to the
//! success probability? A scaled-down run of the full study.

use spo_core::experiments::{run_perturbation_study, summary_table_csv, Histogram, PerturbationConfig};
use spo_core::SignRestriction;

fn main() -> spo_core::Result<()> {
    let mut summaries = Vec::new();
    for restriction in [SignRestriction::AllPositive, SignRestriction::Unrestricted] {
        let cfg = PerturbationConfig {
            n_qubits: 5,
            instances: 6,
            perturbations: 20,
            restriction,
            ..PerturbationConfig::default()
        };
        let out = run_perturbation_study(&cfg)?;
        let hist = Histogram::from_values(&out.delta_ps(), 8)?;
        println!("{}: delta p histogram", restriction.name());
        print!("{}", hist.to_csv());
        summaries.push(out.summary);
    }
    print!("{}", summary_table_csv(&summaries));
    Ok(())
}
