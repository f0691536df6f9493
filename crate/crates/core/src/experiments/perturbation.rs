//! Random quadratic perturbations of the linear schedule and their effect on
//! the minimum gap and on the success probability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, mean, percentile};
use crate::dynamics::{evolve_on_path, EvolveOptions};
use crate::eigen::EigenOptions;
use crate::error::{Result, SpoError};
use crate::hamiltonian::PathHamiltonian;
use crate::instance::QuboInstance;
use crate::schedule::{sig9, Normalization, PerturbationCoefficients, Schedule, SignRestriction};
use crate::spectrum::{gap_values, min_of_gaps, GapRange};

/// What is added to the linear path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `s (1 - s) c_j / norm(c)` with random `c`.
    #[default]
    Sampled,
    /// Nothing at all; every record must come out as zero.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub n_qubits: usize,
    /// Problem instances, seeded `instance_seed + k`.
    pub instances: usize,
    /// Perturbations per instance.
    pub perturbations: usize,
    pub restriction: SignRestriction,
    pub total_time: f64,
    pub intervals: usize,
    pub f_bound: f64,
    pub slew: f64,
    pub normalization: Normalization,
    pub instance_seed: u64,
    pub perturbation_seed: u64,
    /// Redraws allowed per sample before giving up.
    pub max_resamples: usize,
    pub kind: PerturbationKind,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            n_qubits: 6,
            instances: 50,
            perturbations: 200,
            restriction: SignRestriction::Unrestricted,
            total_time: 10.0,
            intervals: 50,
            f_bound: 1.0,
            slew: 2.5,
            normalization: Normalization::SquaredNorm,
            instance_seed: 0,
            perturbation_seed: 1,
            max_resamples: 1000,
            kind: PerturbationKind::Sampled,
        }
    }
}

impl PerturbationConfig {
    fn check(&self) -> Result<()> {
        if self.n_qubits == 0 || self.instances == 0 || self.perturbations == 0 {
            return Err(SpoError::InvalidArgument(
                "qubits, instances and perturbations must be positive".into(),
            ));
        }
        if !(self.total_time > 0.0) {
            return Err(SpoError::InvalidArgument(format!(
                "total time must be positive, got {}",
                self.total_time
            )));
        }
        Ok(())
    }

    /// Instance seeds in study order.
    pub fn instance_seeds(&self) -> Vec<u64> {
        (0..self.instances as u64).map(|k| self.instance_seed + k).collect()
    }
}

/// Linear-schedule reference values of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub instance_seed: u64,
    pub min_gap: f64,
    pub i_min: usize,
    pub p_succ: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationStudyRecord {
    pub instance_seed: u64,
    pub perturbation_seed: u64,
    pub restriction: SignRestriction,
    /// Minimum gap change against the linear schedule.
    pub omega: f64,
    /// Success probability change against the linear schedule.
    pub delta_p: f64,
    #[serde(rename = "T")]
    pub total_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub restriction: SignRestriction,
    pub mean_omega: f64,
    pub mean_delta_p: f64,
    pub pct35_omega: f64,
    pub pct65_omega: f64,
    pub pct35_dp: f64,
    pub pct65_dp: f64,
    /// Instances whose mean gap change is positive.
    pub n_gap_increase: usize,
    pub n_gap_decrease: usize,
    /// Instances whose mean success probability change is positive.
    pub n_succ_increase: usize,
    pub n_succ_decrease: usize,
    pub instances: usize,
    pub perturbations: usize,
    /// Samples redrawn because they broke the amplitude or slew caps.
    pub resampled: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationOutcome {
    pub baselines: Vec<Baseline>,
    /// Instance-major, perturbation-minor.
    pub records: Vec<PerturbationStudyRecord>,
    pub summary: StudySummary,
}

impl PerturbationOutcome {
    /// `instance_seed,perturbation_seed,restriction,omega,delta_p,T`.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("instance_seed,perturbation_seed,restriction,omega,delta_p,T\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.instance_seed,
                r.perturbation_seed,
                r.restriction,
                sig9(r.omega),
                sig9(r.delta_p),
                sig9(r.total_time)
            ));
        }
        out
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.omega).collect()
    }

    pub fn delta_ps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.delta_p).collect()
    }
}

/// One row per summary, columns in the order of the restricted-sampling table.
pub fn summary_table_csv(summaries: &[StudySummary]) -> String {
    let mut out = String::from(
        "restriction,mean_omega,pct35_omega,pct65_omega,mean_delta_p,pct35_dp,pct65_dp,\
         n_gap_increase,n_succ_increase,instances,perturbations,resampled\n",
    );
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.restriction,
            sig9(s.mean_omega),
            sig9(s.pct35_omega),
            sig9(s.pct65_omega),
            sig9(s.mean_delta_p),
            sig9(s.pct35_dp),
            sig9(s.pct65_dp),
            s.n_gap_increase,
            s.n_succ_increase,
            s.instances,
            s.perturbations,
            s.resampled
        ));
    }
    out
}

struct Evaluation {
    min_gap: f64,
    i_min: usize,
    p_succ: f64,
}

fn evaluate(path: &PathHamiltonian, sched: &Schedule, total_time: f64) -> Result<Evaluation> {
    let gaps = gap_values(path, sched, &EigenOptions::default())?;
    let (min_gap, i_min) = min_of_gaps(&gaps, GapRange::Full);
    let p_succ = evolve_on_path(path, sched, total_time, &EvolveOptions::default())?.p_succ;
    Ok(Evaluation { min_gap, i_min, p_succ })
}

/// Draws until the perturbed schedule fits the caps. Returns the schedule, the
/// seed of the accepted draw and the number of rejected draws.
fn draw_schedule(cfg: &PerturbationConfig, instance_seed: u64, index: usize) -> Result<(Schedule, u64, usize)> {
    if cfg.kind == PerturbationKind::Identity {
        let seed = derive_seed(&[cfg.perturbation_seed, instance_seed, index as u64, 0]);
        let sched = Schedule::linear(cfg.n_qubits, cfg.intervals, cfg.f_bound, cfg.slew)?;
        return Ok((sched, seed, 0));
    }
    for attempt in 0..=cfg.max_resamples {
        let seed = derive_seed(&[cfg.perturbation_seed, instance_seed, index as u64, attempt as u64]);
        let coeffs = PerturbationCoefficients::sample(cfg.n_qubits, cfg.restriction, seed);
        match Schedule::quadratic_random(&coeffs, cfg.intervals, cfg.f_bound, cfg.slew, cfg.normalization) {
            Ok(sched) => return Ok((sched, seed, attempt)),
            Err(SpoError::ScheduleRejected(_)) => continue,
            // an all-zero draw is astronomically unlikely but also just redrawn
            Err(SpoError::InvalidArgument(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(SpoError::ScheduleRejected(format!(
        "no admissible perturbation after {} draws (instance seed {instance_seed}, sample {index})",
        cfg.max_resamples + 1
    )))
}

pub fn run_perturbation_study(cfg: &PerturbationConfig) -> Result<PerturbationOutcome> {
    cfg.check()?;
    let seeds = cfg.instance_seeds();
    let instances: Vec<QuboInstance> = seeds
        .iter()
        .map(|&s| QuboInstance::random(cfg.n_qubits, s))
        .collect::<Result<_>>()?;
    let paths: Vec<PathHamiltonian> = instances.iter().map(PathHamiltonian::new).collect();
    let linear = Schedule::linear(cfg.n_qubits, cfg.intervals, cfg.f_bound, cfg.slew)?;

    let baselines: Vec<Baseline> = paths
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(path, &seed)| {
            let e = evaluate(path, &linear, cfg.total_time)?;
            Ok(Baseline {
                instance_seed: seed,
                min_gap: e.min_gap,
                i_min: e.i_min,
                p_succ: e.p_succ,
            })
        })
        .collect::<Result<_>>()?;

    let pairs = cfg.instances * cfg.perturbations;
    let outcomes: Vec<(PerturbationStudyRecord, usize)> = (0..pairs)
        .into_par_iter()
        .map(|idx| {
            let (k, r) = (idx / cfg.perturbations, idx % cfg.perturbations);
            let base = &baselines[k];
            let (sched, seed, rejected) = draw_schedule(cfg, base.instance_seed, r)?;
            let e = evaluate(&paths[k], &sched, cfg.total_time)?;
            let record = PerturbationStudyRecord {
                instance_seed: base.instance_seed,
                perturbation_seed: seed,
                restriction: cfg.restriction,
                omega: e.min_gap - base.min_gap,
                delta_p: e.p_succ - base.p_succ,
                total_time: cfg.total_time,
            };
            Ok((record, rejected))
        })
        .collect::<Result<_>>()?;

    let resampled = outcomes.iter().map(|(_, n)| n).sum();
    let records: Vec<PerturbationStudyRecord> = outcomes.into_iter().map(|(r, _)| r).collect();
    let summary = summarize(cfg, &records, resampled)?;
    Ok(PerturbationOutcome {
        baselines,
        records,
        summary,
    })
}

fn summarize(cfg: &PerturbationConfig, records: &[PerturbationStudyRecord], resampled: usize) -> Result<StudySummary> {
    let mut per_instance = Vec::with_capacity(cfg.instances);
    for chunk in records.chunks(cfg.perturbations) {
        let omega: Vec<f64> = chunk.iter().map(|r| r.omega).collect();
        let dp: Vec<f64> = chunk.iter().map(|r| r.delta_p).collect();
        per_instance.push([
            mean(&omega),
            mean(&dp),
            percentile(&omega, 35.0)?,
            percentile(&omega, 65.0)?,
            percentile(&dp, 35.0)?,
            percentile(&dp, 65.0)?,
        ]);
    }
    let column = |c: usize| -> Vec<f64> { per_instance.iter().map(|row| row[c]).collect() };
    let count = |c: usize, pred: fn(f64) -> bool| per_instance.iter().filter(|row| pred(row[c])).count();
    let all_omega: Vec<f64> = records.iter().map(|r| r.omega).collect();
    let all_dp: Vec<f64> = records.iter().map(|r| r.delta_p).collect();
    Ok(StudySummary {
        restriction: cfg.restriction,
        mean_omega: mean(&all_omega),
        mean_delta_p: mean(&all_dp),
        pct35_omega: mean(&column(2)),
        pct65_omega: mean(&column(3)),
        pct35_dp: mean(&column(4)),
        pct65_dp: mean(&column(5)),
        n_gap_increase: count(0, |v| v > 0.0),
        n_gap_decrease: count(0, |v| v < 0.0),
        n_succ_increase: count(1, |v| v > 0.0),
        n_succ_decrease: count(1, |v| v < 0.0),
        instances: cfg.instances,
        perturbations: cfg.perturbations,
        resampled,
    })
}
