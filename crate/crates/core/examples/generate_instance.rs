//! Seeded random QUBO instances: draw one, inspect it, round-trip it
//! through the JSON instance format.
//!
//! ```bash
//! cargo run --example generate_instance -- 5 42
//! ```

use spo_core::QuboInstance;

fn main() -> spo_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(5, |a| a.parse().expect("qubit count"));
    let seed: u64 = args.next().map_or(42, |a| a.parse().expect("seed"));

    let inst = QuboInstance::random(n, seed)?;
    println!("{n} qubits, seed {seed}, largest |coefficient| {:.4}", inst.max_coefficient());
    println!("fields: {:?}", inst.fields());

    // brute force over the 2^n spin configurations
    let diag = inst.diagonal();
    let (best, e0) = diag
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    println!("ground energy {e0:.6} at basis state {best:0n$b}");

    let json = inst.to_json()?;
    assert_eq!(QuboInstance::from_json(&json)?, inst);
    print!("{json}");
    Ok(())
}
