//! Iterated convex surrogate with spectral cutting planes. Each outer
//! iteration solves a linear program in the schedule values, bounded by
//! Rayleigh-Ritz estimates of the two lowest levels, inside a trust region.

use spo_core::convex::{optimize_convex, ConvexConfig};
use spo_core::QuboInstance;

fn main() -> spo_core::Result<()> {
    let inst = QuboInstance::random(5, 1)?;
    let cfg = ConvexConfig::for_instance(&inst);
    let result = optimize_convex(&inst, &cfg)?;

    println!("linear min gap {:.5}, endpoint gap {:.5}", result.initial_min_gap, result.endpoint_gap);
    for (it, check) in result.iterations.iter().zip(&result.checks) {
        println!(
            "iter {:>2}: surrogate {:.5}  true {:.5} @ {:>2}  cuts {:>3}  eta {:.4}  {}",
            it.iter,
            it.surrogate_objective,
            it.true_min_gap,
            it.i_min,
            it.cuts_added,
            it.eta,
            if check.accepted { "accepted" } else { "rejected" }
        );
    }
    println!("stop: {:?}; final interior min gap {:.5} at i = {}", result.stop, result.min_gap, result.i_min);
    print!("{}", result.schedule.to_csv());
    Ok(())
}
