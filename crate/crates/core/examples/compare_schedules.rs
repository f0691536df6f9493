//! Linear interpolation against an optimized schedule: the optimizer runs
//! once and both paths are evolved at several annealing times.

use spo_core::experiments::{compare_spo, SpoMethod, SpoSettings};
use spo_core::QuboInstance;

fn main() -> spo_core::Result<()> {
    let inst = QuboInstance::random(6, 4)?;
    let settings = SpoSettings::for_instance(&inst, SpoMethod::Convex);
    let table = compare_spo(&inst, &[5.0, 10.0, 20.0, 50.0], &settings)?;

    println!(
        "min gap: linear {:.5} @ {}, optimized {:.5} @ {}",
        table.linear_min_gap, table.linear_i_min, table.spo_min_gap, table.spo_i_min
    );
    print!("{}", table.to_csv());
    Ok(())
}
