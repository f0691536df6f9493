//! Gradient-based schedule optimization on a small instance: the soft-min
//! of the gaps is raised with Hellmann-Feynman derivatives until the
//! interior bottleneck reaches the endpoint gap.

use spo_core::direct::{optimize_direct, DirectConfig};
use spo_core::{gap_profile, GapRange, QuboInstance, Schedule};

fn main() -> spo_core::Result<()> {
    let inst = QuboInstance::random(3, 2)?;
    let linear = Schedule::linear(3, 50, inst.max_coefficient(), 2.5)?;
    let before = gap_profile(&inst, &linear, 2)?;
    let (lin_gap, lin_i) = before.min_gap(GapRange::Full);
    println!("linear: min gap {lin_gap:.5} at i = {lin_i}");

    let result = optimize_direct(&inst, &linear, &DirectConfig::default())?;
    println!(
        "direct: interior min gap {:.5} at i = {} after {} accepted steps ({:.2}s)",
        result.final_min_gap,
        result.i_min,
        result.objective_history.len() - 1,
        result.wall_time_s
    );
    println!("endpoint gap {:.5}", before.gap(0).min(before.gap(50)));
    print!("{}", result.report_json()?);
    Ok(())
}
