//! The studies: SPO against linear interpolation, slew sweeps, hard-instance
//! mining and random-perturbation statistics.
//!
//! Every study is a pure function of its configuration and seeds. Work is
//! spread over the rayon pool but results are always gathered in index order,
//! so reruns produce identical outputs whatever the thread count.

mod compare;
mod mining;
mod perturbation;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpoError};
use crate::schedule::sig9;

pub use compare::{
    compare_schedules, compare_spo, epsilon_sweep, optimize_spo, sweep_csv, ComparisonRow, ComparisonTable, SpoMethod,
    SpoSettings, SweepPoint,
};
pub use mining::{mine_hard_instances, MinedInstance, MiningConfig, MiningOutcome};
pub use perturbation::{
    run_perturbation_study, summary_table_csv, Baseline, PerturbationConfig, PerturbationKind, PerturbationOutcome,
    PerturbationStudyRecord, StudySummary,
};

/// One round of the splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a tuple of integers into one well-mixed seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Nearest-rank percentile: the element of rank `ceil(pct / 100 * n)` (1-based)
/// in sorted order, with rank clamped to at least 1.
pub fn percentile(values: &[f64], pct: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(SpoError::InvalidArgument("percentile of an empty sample".into()));
    }
    if !(0.0..=100.0).contains(&pct) {
        return Err(SpoError::InvalidArgument(format!("percentile {pct} outside [0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[nearest_rank(pct, sorted.len()) - 1])
}

fn nearest_rank(pct: f64, n: usize) -> usize {
    ((pct / 100.0 * n as f64).ceil() as usize).clamp(1, n)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Median as the 50th nearest-rank percentile.
pub fn median(values: &[f64]) -> Result<f64> {
    percentile(values, 50.0)
}

/// Equal-width histogram. Bin `k` covers `[edges[k], edges[k+1])`; the last bin
/// is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Spans `[min, max]` of the data; a constant sample gets a unit-wide range.
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(SpoError::InvalidArgument("histogram needs at least one bin".into()));
        }
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(SpoError::InvalidArgument("histogram needs finite, non-empty data".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + k as f64 * width).collect();
        edges.push(hi);
        Self::with_edges(values, edges)
    }

    /// Counts against explicit ascending edges; values outside are dropped.
    pub fn with_edges(values: &[f64], edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SpoError::InvalidArgument("histogram edges must be strictly ascending".into()));
        }
        let bins = edges.len() - 1;
        let mut counts = vec![0; bins];
        for &v in values {
            if v < edges[0] || v > edges[bins] {
                continue;
            }
            // first edge strictly above v, minus one
            let k = edges.partition_point(|&e| e <= v).saturating_sub(1).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `bin,lower,upper,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin,lower,upper,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{k},{},{},{c}\n", sig9(self.edges[k]), sig9(self.edges[k + 1])));
        }
        out
    }
}
