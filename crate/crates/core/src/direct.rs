//! Direct maximization of the interior minimum gap.
//!
//! The nonsmooth objective `min_i gap(i)` is replaced by the soft-min
//! `-(1/beta) ln sum_i exp(-beta gap(i))`, raised by projected gradient ascent
//! with backtracking, for an increasing sequence of `beta`. Gap derivatives
//! come from first-order perturbation theory:
//! `d gap(i) / d f_j(i) = <u1|H_j|u1> - <u0|H_j|u0>`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{lowest_eigenpairs_sparse, EigenOptions};
use crate::error::{Result, SpoError};
use crate::hamiltonian::PathHamiltonian;
use crate::instance::QuboInstance;
use crate::schedule::Schedule;
use crate::spectrum::{endpoint_gap, gap_values, min_of_gaps, GapRange};

/// Splitting below which the first excited level counts as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectConfig {
    /// Soft-min temperatures, one continuation round each (nondecreasing).
    pub betas: Vec<f64>,
    /// Accepted steps per round.
    pub max_iters: usize,
    /// Stop a round once the largest gradient entry falls below this.
    pub grad_tol: f64,
    /// First trial step as a fraction of the amplitude cap.
    pub initial_step: f64,
    /// Factor applied to the step on each rejected trial.
    pub shrink: f64,
    /// Give up the line search once the step falls below this fraction of the cap.
    pub min_step: f64,
    pub eigen: EigenOptions,
}

impl Default for DirectConfig {
    fn default() -> Self {
        Self {
            betas: vec![10.0, 50.0, 250.0],
            max_iters: 200,
            grad_tol: 1e-9,
            initial_step: 0.25,
            shrink: 0.5,
            min_step: 1e-7,
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectResult {
    pub schedule: Schedule,
    /// True interior minimum gap: initial value, then one entry per accepted step.
    pub objective_history: Vec<f64>,
    pub final_min_gap: f64,
    pub i_min: usize,
    pub wall_time_s: f64,
    /// The last round ended because no trial step was acceptable.
    pub stall_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectReport {
    pub objective_history: Vec<f64>,
    pub final_min_gap: f64,
    pub i_min: usize,
    pub wall_time_s: f64,
    pub stall_flag: bool,
}

impl DirectResult {
    pub fn report(&self) -> DirectReport {
        DirectReport {
            objective_history: self.objective_history.clone(),
            final_min_gap: self.final_min_gap,
            i_min: self.i_min,
            wall_time_s: self.wall_time_s,
            stall_flag: self.stall_flag,
        }
    }

    pub fn report_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.report())? + "\n")
    }
}

/// `-(1/beta) ln sum exp(-beta x)`, evaluated around the minimum.
pub fn soft_min(values: &[f64], beta: f64) -> f64 {
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = values.iter().map(|&v| (-beta * (v - m)).exp()).sum();
    m - s.ln() / beta
}

/// Gap derivatives with respect to every local coefficient at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GapDerivative {
    pub gap: f64,
    /// `lambda_2 - lambda_1`, infinite when the space has only two levels.
    pub excited_splitting: f64,
    /// Per-term derivative using the lowest excited vector as returned.
    pub gradient: Vec<f64>,
    // for degenerate points: <u2|H_j|u2> - <u0|H_j|u0> and <u1|H_j|u2>
    alternative: Option<(Vec<f64>, Vec<f64>)>,
}

impl GapDerivative {
    pub fn is_degenerate(&self) -> bool {
        self.excited_splitting < DEGENERACY_TOLERANCE
    }

    /// Gradient along which the gap is least increasing for `direction`:
    /// inside a degenerate excited pair, the excited vector is rotated to the
    /// lowest eigenvector of the pair's directional derivative.
    pub fn subgradient(&self, direction: &[f64]) -> Vec<f64> {
        let Some((g2, cross)) = &self.alternative else {
            return self.gradient.clone();
        };
        if !self.is_degenerate() {
            return self.gradient.clone();
        }
        let d = |v: &[f64]| -> f64 { v.iter().zip(direction).map(|(a, b)| a * b).sum() };
        let (a, b, c) = (d(&self.gradient), d(cross), d(g2));
        // lowest eigenvector of [[a, b], [b, c]]
        let theta = 0.5 * (2.0 * b).atan2(a - c);
        let (cos, sin) = (theta.cos(), theta.sin());
        let lo_first = a * cos * cos + 2.0 * b * cos * sin + c * sin * sin;
        let (x, y) = if lo_first <= a * sin * sin - 2.0 * b * cos * sin + c * cos * cos {
            (cos, sin)
        } else {
            (-sin, cos)
        };
        // u0 terms enter all three with weight x^2 + y^2 = 1
        self.gradient
            .iter()
            .zip(g2)
            .zip(cross)
            .map(|((g1, g2), x12)| x * x * g1 + 2.0 * x * y * x12 + y * y * g2)
            .collect()
    }
}

/// Derivatives of `gap(i)` with respect to the local coefficients at `i`.
pub fn gap_derivative(path: &PathHamiltonian, sched: &Schedule, i: usize, eigen: &EigenOptions) -> Result<GapDerivative> {
    let dim = path.dim();
    let k = dim.min(3);
    let pairs = lowest_eigenpairs_sparse(&path.at(sched, i), k, eigen)?;
    let e0 = path.local_expectations(&pairs.vectors[0]);
    let e1 = path.local_expectations(&pairs.vectors[1]);
    let gradient: Vec<f64> = e1.iter().zip(&e0).map(|(a, b)| a - b).collect();
    let (excited_splitting, alternative) = if k >= 3 {
        let split = pairs.values[2] - pairs.values[1];
        let alt = if split < DEGENERACY_TOLERANCE {
            let e2 = path.local_expectations(&pairs.vectors[2]);
            let cross = path.local_matrix_elements(&pairs.vectors[1], &pairs.vectors[2]);
            Some((e2.iter().zip(&e0).map(|(a, b)| a - b).collect(), cross))
        } else {
            None
        };
        (split, alt)
    } else {
        (f64::INFINITY, None)
    };
    Ok(GapDerivative {
        gap: (pairs.values[1] - pairs.values[0]).max(0.0),
        excited_splitting,
        gradient,
        alternative,
    })
}

/// `d gap(i) / d f_j(i)`. Fails at points where the first excited level is
/// degenerate, where the gap is not differentiable.
pub fn gap_gradient(inst: &QuboInstance, sched: &Schedule, i: usize, j: usize) -> Result<f64> {
    if sched.n_qubits() != inst.n_qubits() {
        return Err(SpoError::QubitMismatch {
            expected: inst.n_qubits(),
            actual: sched.n_qubits(),
        });
    }
    if i > sched.intervals() {
        return Err(SpoError::GridIndex {
            index: i,
            max: sched.intervals(),
        });
    }
    if j >= sched.n_terms() {
        return Err(SpoError::InvalidArgument(format!("term index {j} out of range")));
    }
    let d = gap_derivative(&PathHamiltonian::new(inst), sched, i, &EigenOptions::default())?;
    if d.is_degenerate() {
        return Err(SpoError::DegenerateExcited {
            index: i,
            splitting: d.excited_splitting,
        });
    }
    Ok(d.gradient[j])
}

struct Evaluation {
    gaps: Vec<f64>,
    soft: f64,
    true_min: f64,
}

fn evaluate(path: &PathHamiltonian, sched: &Schedule, beta: f64, eigen: &EigenOptions) -> Result<Evaluation> {
    let gaps = gap_values(path, sched, eigen)?;
    let interior = &gaps[1..gaps.len() - 1];
    let soft = soft_min(interior, beta);
    let (true_min, _) = min_of_gaps(&gaps, GapRange::Interior);
    debug_assert!(soft <= true_min + 1e-12);
    debug_assert!(true_min <= soft + (interior.len() as f64).ln() / beta + 1e-12);
    Ok(Evaluation { gaps, soft, true_min })
}

/// Maximizes the interior minimum gap starting from `init`.
///
/// The returned schedule is feasible, and its interior minimum gap is never
/// below that of `init`.
pub fn optimize_direct(inst: &QuboInstance, init: &Schedule, cfg: &DirectConfig) -> Result<DirectResult> {
    let start = Instant::now();
    if init.n_qubits() != inst.n_qubits() {
        return Err(SpoError::QubitMismatch {
            expected: inst.n_qubits(),
            actual: init.n_qubits(),
        });
    }
    if let Some(v) = init.validate().first() {
        return Err(SpoError::InvalidArgument(format!("initial schedule infeasible: {v}")));
    }
    if cfg.betas.is_empty() || cfg.betas.windows(2).any(|w| w[1] < w[0]) || cfg.betas[0] <= 0.0 {
        return Err(SpoError::InvalidArgument("betas must be positive and nondecreasing".into()));
    }
    let path = PathHamiltonian::new(inst);
    let n = init.intervals();
    let m = init.n_terms();
    let mut current = init.clone();
    let mut eval = evaluate(&path, &current, cfg.betas[0], &cfg.eigen)?;
    let ceiling = endpoint_gap(&eval.gaps);
    let mut history = vec![eval.true_min];
    let mut stall = false;
    let cap = init.f_bound();

    'rounds: for &beta in &cfg.betas {
        if cap == 0.0 || init.slew() == 0.0 {
            break;
        }
        eval = evaluate(&path, &current, beta, &cfg.eigen)?;
        let mut step = cfg.initial_step * cap;
        stall = false;
        for _ in 0..cfg.max_iters {
            if eval.true_min >= ceiling {
                break 'rounds;
            }
            let interior = &eval.gaps[1..n];
            let (lo, _) = min_of_gaps(&eval.gaps, GapRange::Interior);
            let weights: Vec<f64> = interior.iter().map(|&g| (-beta * (g - lo)).exp()).collect();
            let total: f64 = weights.iter().sum();

            // soft-min gradient, column by column
            let columns: Vec<Vec<f64>> = (1..n)
                .into_par_iter()
                .map(|i| -> Result<Vec<f64>> {
                    let w = weights[i - 1] / total;
                    if w < 1e-14 {
                        return Ok(vec![0.0; m]);
                    }
                    let d = gap_derivative(&path, &current, i, &cfg.eigen)?;
                    let g = if d.is_degenerate() {
                        let trial = d.gradient.clone();
                        d.subgradient(&trial)
                    } else {
                        d.gradient
                    };
                    Ok(g.into_iter().map(|x| w * x).collect())
                })
                .collect::<Result<_>>()?;
            let gmax = columns.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
            if gmax < cfg.grad_tol {
                stall = false;
                break;
            }

            let accepted = loop {
                let mut trial = current.clone();
                for (c, col) in columns.iter().enumerate() {
                    for (j, g) in col.iter().enumerate() {
                        trial.set(j, c + 1, current.value(j, c + 1) + step * g / gmax);
                    }
                }
                trial.project();
                let te = evaluate(&path, &trial, beta, &cfg.eigen)?;
                if te.soft > eval.soft && te.true_min >= eval.true_min {
                    break Some((trial, te));
                }
                step *= cfg.shrink;
                if step < cfg.min_step * cap {
                    break None;
                }
            };
            match accepted {
                Some((trial, te)) => {
                    current = trial;
                    eval = te;
                    history.push(eval.true_min);
                    step = (step * 1.5).min(cap);
                }
                None => {
                    stall = true;
                    break;
                }
            }
        }
    }

    let (final_min_gap, i_min) = min_of_gaps(&eval.gaps, GapRange::Interior);
    Ok(DirectResult {
        schedule: current,
        objective_history: history,
        final_min_gap,
        i_min,
        wall_time_s: start.elapsed().as_secs_f64(),
        stall_flag: stall,
    })
}
