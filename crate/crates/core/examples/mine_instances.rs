//! Hard-instance mining: evolve a pool of random instances along the
//! linear path and keep the least successful ones. Their bottlenecks sit
//! late in the anneal.

use spo_core::experiments::{median, mine_hard_instances, MiningConfig};

fn main() -> spo_core::Result<()> {
    let cfg = MiningConfig {
        n_qubits: 6,
        pool_size: 200,
        keep: 10,
        ..MiningConfig::default()
    };
    let out = mine_hard_instances(&cfg)?;
    print!("{}", out.kept_csv());
    println!(
        "median s_min: kept {:.3}, pool {:.3}",
        median(&out.kept_s_min())?,
        median(&out.pool_s_min())?
    );
    Ok(())
}
