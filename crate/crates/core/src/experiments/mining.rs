//! Hard-instance mining: evolve a seeded pool under the linear schedule and
//! keep the instances with the lowest success probability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_on_path, EvolveOptions};
use crate::eigen::EigenOptions;
use crate::error::{Result, SpoError};
use crate::hamiltonian::PathHamiltonian;
use crate::instance::QuboInstance;
use crate::schedule::{sig9, Schedule};
use crate::spectrum::{gap_values, min_of_gaps, GapRange};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningConfig {
    pub n_qubits: usize,
    pub pool_size: usize,
    pub keep: usize,
    pub total_time: f64,
    pub intervals: usize,
    /// Pool instance `k` uses seed `base_seed + k`.
    pub base_seed: u64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            n_qubits: 8,
            pool_size: 2000,
            keep: 30,
            total_time: 10.0,
            intervals: 50,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinedInstance {
    pub seed: u64,
    pub p_succ: f64,
    /// Minimum gap of the linear schedule over the whole path.
    pub min_gap: f64,
    pub i_min: usize,
    pub s_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningOutcome {
    /// Every pool instance, in seed order.
    pub pool: Vec<MinedInstance>,
    /// The `keep` hardest, ascending by success probability.
    pub kept: Vec<MinedInstance>,
}

impl MiningOutcome {
    /// `rank,seed,p_succ,min_gap,i_min,s_min` for the kept instances.
    pub fn kept_csv(&self) -> String {
        let mut out = String::from("rank,seed,p_succ,min_gap,i_min,s_min\n");
        for (rank, m) in self.kept.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                rank + 1,
                m.seed,
                sig9(m.p_succ),
                sig9(m.min_gap),
                m.i_min,
                sig9(m.s_min)
            ));
        }
        out
    }

    pub fn pool_s_min(&self) -> Vec<f64> {
        self.pool.iter().map(|m| m.s_min).collect()
    }

    pub fn kept_s_min(&self) -> Vec<f64> {
        self.kept.iter().map(|m| m.s_min).collect()
    }
}

pub fn mine_hard_instances(cfg: &MiningConfig) -> Result<MiningOutcome> {
    if cfg.keep == 0 || cfg.pool_size < cfg.keep {
        return Err(SpoError::InvalidArgument(format!(
            "need 0 < keep <= pool size, got keep {} of {}",
            cfg.keep, cfg.pool_size
        )));
    }
    let linear = Schedule::linear(cfg.n_qubits, cfg.intervals, 1.0, 2.5)?;
    let pool: Vec<MinedInstance> = (0..cfg.pool_size as u64)
        .into_par_iter()
        .map(|k| {
            let seed = cfg.base_seed + k;
            let inst = QuboInstance::random(cfg.n_qubits, seed)?;
            let path = PathHamiltonian::new(&inst);
            let p_succ = evolve_on_path(&path, &linear, cfg.total_time, &EvolveOptions::default())?.p_succ;
            let gaps = gap_values(&path, &linear, &EigenOptions::default())?;
            let (min_gap, i_min) = min_of_gaps(&gaps, GapRange::Full);
            Ok(MinedInstance {
                seed,
                p_succ,
                min_gap,
                i_min,
                s_min: linear.s(i_min),
            })
        })
        .collect::<Result<_>>()?;
    let mut ranked = pool.clone();
    ranked.sort_by(|a, b| a.p_succ.total_cmp(&b.p_succ).then(a.seed.cmp(&b.seed)));
    ranked.truncate(cfg.keep);
    Ok(MiningOutcome { pool, kept: ranked })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MiningConfig {
        MiningConfig {
            n_qubits: 3,
            pool_size: 12,
            keep: 4,
            total_time: 5.0,
            intervals: 20,
            base_seed: 100,
        }
    }

    #[test]
    fn pool_of_one_returns_it() {
        let cfg = MiningConfig {
            pool_size: 1,
            keep: 1,
            ..small()
        };
        let out = mine_hard_instances(&cfg).unwrap();
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.kept[0].seed, 100);
        assert_eq!(out.kept, out.pool);
    }

    #[test]
    fn kept_are_the_lowest_success_probabilities() {
        let out = mine_hard_instances(&small()).unwrap();
        assert_eq!(out.pool.len(), 12);
        assert!(out.kept.windows(2).all(|w| w[0].p_succ <= w[1].p_succ));
        let worst_kept = out.kept.last().unwrap().p_succ;
        let dropped = out.pool.iter().filter(|m| !out.kept.contains(m));
        assert!(dropped.into_iter().all(|m| m.p_succ >= worst_kept));
        assert_eq!(out, mine_hard_instances(&small()).unwrap());
        assert_eq!(out.kept_csv().lines().count(), 5);
    }

    #[test]
    fn rejects_keep_above_pool() {
        let cfg = MiningConfig { keep: 13, ..small() };
        assert!(mine_hard_instances(&cfg).is_err());
    }
}
