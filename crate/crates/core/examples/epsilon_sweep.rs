//! Achieved minimum gap as the slew limit grows. Feasible sets are nested,
//! so the curve is nondecreasing and levels off at the endpoint gap.

use spo_core::convex::ConvexConfig;
use spo_core::experiments::{epsilon_sweep, sweep_csv};
use spo_core::{gap_profile, GapRange, QuboInstance, Schedule};

fn main() -> spo_core::Result<()> {
    // first seed whose linear-path bottleneck lies inside the path
    let inst = (0..)
        .map(|seed| QuboInstance::random(5, seed))
        .find(|inst| {
            let inst = inst.as_ref().expect("valid size");
            let linear = Schedule::linear(5, 50, inst.max_coefficient(), 2.5).expect("valid caps");
            let (_, i) = gap_profile(inst, &linear, 2).expect("spectrum").min_gap(GapRange::Full);
            0 < i && i < 50
        })
        .expect("some seed")?;
    println!("instance seed {}", inst.seed());

    let base = ConvexConfig::for_instance(&inst);
    let points = epsilon_sweep(&inst, &[0.1, 0.25, 0.5, 1.0, 2.5, 5.0], &base)?;
    print!("{}", sweep_csv(&points));
    Ok(())
}
