//! Iterated convex approximation of the maximin gap problem.
//!
//! Starting from the linear interpolation, each outer iteration freezes the
//! incumbent's low-lying eigenvectors, solves the trust-region subproblem of
//! [`subproblem`], and re-evaluates the true gaps of the candidate. Candidates
//! that lower the true interior minimum are rejected and the trust region is
//! halved. The loop stops when the interior minimum is within `xi` of the
//! endpoint gap `min(gap(0), gap(N))`, when an accepted step improves it by
//! less than `xi`, or after `max_outer` iterations.

pub mod subproblem;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::eigen::EigenOptions;
use crate::error::{Result, SpoError};
use crate::hamiltonian::PathHamiltonian;
use crate::instance::QuboInstance;
use crate::schedule::Schedule;
use crate::spectrum::{endpoint_gap, min_gap, profile_on_path, GapRange, ProfileOptions, SpectrumProfile};

pub use subproblem::{solve_subproblem, surrogate_bounds, Projectors, SubproblemLimits, SubproblemSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexConfig {
    pub intervals: usize,
    pub f_bound: f64,
    pub slew: f64,
    /// Excited eigenvectors kept per grid point.
    pub p: usize,
    /// Initial trust-region radius; `None` means a tenth of `f_bound`.
    pub eta: Option<f64>,
    pub xi: f64,
    pub max_outer: usize,
    pub lmi_tol: f64,
    pub max_cut_rounds: usize,
    pub eigen: EigenOptions,
}

impl ConvexConfig {
    /// Defaults for an instance: `N = 50`, slew `2.5`, amplitude cap equal to
    /// the largest `|h_i|` or `|J_ij|`.
    pub fn for_instance(inst: &QuboInstance) -> Self {
        Self {
            intervals: 50,
            f_bound: inst.max_coefficient(),
            slew: 2.5,
            p: 5,
            eta: None,
            xi: 1e-4,
            max_outer: 100,
            lmi_tol: 1e-9,
            max_cut_rounds: 200,
            eigen: EigenOptions::default(),
        }
    }

    pub fn initial_eta(&self) -> f64 {
        self.eta.unwrap_or(0.1 * self.f_bound)
    }

    fn check(&self) -> Result<()> {
        if self.p == 0 {
            return Err(SpoError::InvalidArgument("p must be at least 1".into()));
        }
        if !(self.initial_eta() >= 0.0) || !(self.xi > 0.0) {
            return Err(SpoError::InvalidArgument("need eta >= 0 and xi > 0".into()));
        }
        Ok(())
    }
}

/// One outer iteration, as written to the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iter: usize,
    pub surrogate_objective: f64,
    pub true_min_gap: f64,
    pub i_min: usize,
    pub cuts_added: usize,
    pub eta: f64,
    pub wall_time_s: f64,
}

/// Extra per-iteration checks kept alongside the report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationCheck {
    /// Largest `lambda0(i) - eps0(i)` at the incumbent (should be <= 0).
    pub ground_bound_excess: f64,
    /// Largest `eps1(i) - lambda1(i)` at the incumbent (should be <= 0).
    pub excited_bound_excess: f64,
    /// Smallest LMI eigenvalue at the subproblem solution.
    pub lmi_min_eigenvalue: f64,
    pub incumbent_objective: f64,
    pub accepted: bool,
    /// Interior minimum within `xi` of the endpoint gap after this iteration.
    pub endpoint_reached: bool,
    /// Accepted improvement below `xi`.
    pub stalled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The linear schedule already has its minimum gap at an endpoint.
    AlreadyBestCase,
    EndpointReached,
    Stalled,
    TrustRegionCollapsed,
    MaxOuter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexResult {
    /// Best schedule by true interior minimum gap.
    pub schedule: Schedule,
    pub min_gap: f64,
    pub i_min: usize,
    pub initial_min_gap: f64,
    pub endpoint_gap: f64,
    pub iterations: Vec<IterationReport>,
    pub checks: Vec<IterationCheck>,
    pub stop: StopReason,
    pub wall_time_s: f64,
}

impl ConvexResult {
    pub fn report_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.iterations)? + "\n")
    }
}

/// Eigenvectors of `sched_hat` at the interior points: `u0` and `u1..up`.
pub fn build_projectors(inst: &QuboInstance, sched_hat: &Schedule, p: usize) -> Result<Projectors> {
    let path = PathHamiltonian::new(inst);
    let profile = profile_on_path(&path, sched_hat, &ProfileOptions::new(p + 1))?;
    Projectors::from_profile(&profile, p)
}

/// Runs the iteration from the linear schedule.
pub fn optimize_convex(inst: &QuboInstance, cfg: &ConvexConfig) -> Result<ConvexResult> {
    let init = Schedule::linear(inst.n_qubits(), cfg.intervals, cfg.f_bound, cfg.slew)?;
    run(inst, init, cfg, true)
}

/// Runs the iteration from a feasible starting schedule (for warm starts).
/// The grid and caps of `cfg` must match those of `init`.
pub fn optimize_convex_from(inst: &QuboInstance, init: &Schedule, cfg: &ConvexConfig) -> Result<ConvexResult> {
    if init.intervals() != cfg.intervals {
        return Err(SpoError::InvalidArgument("start schedule and config use different grids".into()));
    }
    let init = init.with_limits(cfg.f_bound, cfg.slew)?;
    if let Some(v) = init.validate().first() {
        return Err(SpoError::InvalidArgument(format!("start schedule infeasible: {v}")));
    }
    run(inst, init, cfg, false)
}

fn run(inst: &QuboInstance, init: Schedule, cfg: &ConvexConfig, from_linear: bool) -> Result<ConvexResult> {
    let start = Instant::now();
    cfg.check()?;
    if init.n_qubits() != inst.n_qubits() {
        return Err(SpoError::QubitMismatch {
            expected: inst.n_qubits(),
            actual: init.n_qubits(),
        });
    }
    let dim = 1usize << inst.n_qubits();
    if cfg.p + 1 > dim {
        return Err(SpoError::InvalidArgument(format!(
            "p = {} needs at least {} levels, the space has {dim}",
            cfg.p,
            cfg.p + 1
        )));
    }
    let path = PathHamiltonian::new(inst);
    let popts = ProfileOptions {
        eigen: cfg.eigen,
        ..ProfileOptions::new(cfg.p + 1)
    };
    let mut profile = profile_on_path(&path, &init, &popts)?;
    let ceiling = endpoint_gap(profile.gaps());
    let (initial_min_gap, initial_i_min) = min_gap(&profile, GapRange::Interior);
    let mut incumbent = init;
    let mut best = (initial_min_gap, initial_i_min);
    let mut iterations = Vec::new();
    let mut checks = Vec::new();

    let (_, full_i) = min_gap(&profile, GapRange::Full);
    let n = cfg.intervals;
    let stop = if from_linear && (full_i == 0 || full_i == n) {
        StopReason::AlreadyBestCase
    } else if best.0 >= ceiling - cfg.xi {
        StopReason::EndpointReached
    } else {
        let mut eta = cfg.initial_eta();
        let mut reason = StopReason::MaxOuter;
        for iter in 1..=cfg.max_outer {
            let proj = Projectors::from_profile(&profile, cfg.p)?;
            let (ground_excess, excited_excess) = bound_excess(&path, &proj, &incumbent, &profile)?;
            let limits = SubproblemLimits {
                eta,
                lmi_tol: cfg.lmi_tol,
                max_cut_rounds: cfg.max_cut_rounds,
            };
            let sol = solve_subproblem(&path, &proj, &incumbent, &limits)?;
            let candidate = profile_on_path(&path, &sol.schedule, &popts)?;
            let (cand_min, cand_i) = min_gap(&candidate, GapRange::Interior);
            let accepted = cand_min >= best.0;
            let improvement = cand_min - best.0;
            if accepted {
                incumbent = sol.schedule.clone();
                profile = candidate;
                best = (cand_min, cand_i);
            } else {
                eta *= 0.5;
            }
            let endpoint_reached = best.0 >= ceiling - cfg.xi;
            let stalled = accepted && improvement < cfg.xi;
            iterations.push(IterationReport {
                iter,
                surrogate_objective: sol.objective,
                true_min_gap: cand_min,
                i_min: cand_i,
                cuts_added: sol.cut_count,
                eta: limits.eta,
                wall_time_s: start.elapsed().as_secs_f64(),
            });
            checks.push(IterationCheck {
                ground_bound_excess: ground_excess,
                excited_bound_excess: excited_excess,
                lmi_min_eigenvalue: sol.lmi_min_eigenvalue,
                incumbent_objective: sol.incumbent_objective,
                accepted,
                endpoint_reached,
                stalled,
            });
            if endpoint_reached {
                reason = StopReason::EndpointReached;
                break;
            }
            if stalled {
                reason = StopReason::Stalled;
                break;
            }
            if eta < 1e-6 * cfg.f_bound.max(f64::MIN_POSITIVE) {
                reason = StopReason::TrustRegionCollapsed;
                break;
            }
        }
        reason
    };

    Ok(ConvexResult {
        schedule: incumbent,
        min_gap: best.0,
        i_min: best.1,
        initial_min_gap,
        endpoint_gap: ceiling,
        iterations,
        checks,
        stop,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// How far the frozen-vector bounds at the incumbent overshoot the true
/// levels: `max(lambda0 - eps0)` and `max(eps1 - lambda1)`.
fn bound_excess(
    path: &PathHamiltonian,
    proj: &Projectors,
    incumbent: &Schedule,
    profile: &SpectrumProfile,
) -> Result<(f64, f64)> {
    let (e0, e1) = surrogate_bounds(path, proj, incumbent)?;
    let mut g: f64 = f64::NEG_INFINITY;
    let mut x: f64 = f64::NEG_INFINITY;
    for i in 1..proj.intervals() {
        let ev = profile.eigenvalues(i);
        g = g.max(ev[0] - e0[i - 1]);
        x = x.max(e1[i - 1] - ev[1]);
    }
    Ok((g, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_minimum_returns_immediately() {
        // a lone field: the gap shrinks monotonically towards s = 1
        let inst = QuboInstance::new(1, vec![0.1], std::iter::empty(), 0).unwrap();
        let mut cfg = ConvexConfig::for_instance(&inst);
        cfg.p = 1;
        let r = optimize_convex(&inst, &cfg).unwrap();
        assert_eq!(r.stop, StopReason::AlreadyBestCase);
        assert!(r.iterations.is_empty());
        assert!(r.schedule.is_linear());
    }

    #[test]
    fn zero_radius_pins_the_incumbent() {
        let inst = QuboInstance::random(3, 1).unwrap();
        let sched = Schedule::linear(3, 10, 1.0, 2.5).unwrap();
        let path = PathHamiltonian::new(&inst);
        let proj = build_projectors(&inst, &sched, 2).unwrap();
        let limits = SubproblemLimits {
            eta: 0.0,
            lmi_tol: 1e-10,
            max_cut_rounds: 20,
        };
        let sol = solve_subproblem(&path, &proj, &sched, &limits).unwrap();
        assert_eq!(sol.schedule, sched);
        let profile = crate::spectrum::gap_profile(&inst, &sched, 3).unwrap();
        for i in 1..10 {
            // Rayleigh quotient at an exact eigenvector, and min of the
            // compressed block equal to lambda1
            assert!((sol.eps0[i - 1] - profile.eigenvalues(i)[0]).abs() < 1e-10);
            assert!((sol.eps1[i - 1] - profile.eigenvalues(i)[1]).abs() < 1e-10);
        }
        assert!((sol.objective - sol.incumbent_objective).abs() < 1e-12);
    }

    #[test]
    fn too_many_levels_is_rejected() {
        let inst = QuboInstance::new(1, vec![0.5], std::iter::empty(), 0).unwrap();
        let cfg = ConvexConfig::for_instance(&inst);
        assert!(optimize_convex(&inst, &cfg).is_err());
    }
}
