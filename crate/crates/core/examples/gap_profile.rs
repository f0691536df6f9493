//! Low-lying spectrum along the linear interpolation, written as the
//! profile CSV (`i,s,lambda0..,gap`).

use spo_core::{gap_profile, GapRange, QuboInstance, Schedule};

fn main() -> spo_core::Result<()> {
    let inst = QuboInstance::random(6, 7)?;
    let linear = Schedule::linear(6, 50, inst.max_coefficient(), 2.5)?;
    let profile = gap_profile(&inst, &linear, 4)?;

    let (gap, i) = profile.min_gap(GapRange::Full);
    println!("gap at s=0: {:.12}", profile.gap(0));
    println!("minimum gap {gap:.6} at s = {:.2}", profile.s(i));
    print!("{}", profile.to_csv());
    Ok(())
}
