//! Schrödinger evolution under a piecewise-constant schedule.
//!
//! On the interval `[i/N, (i+1)/N)` the Hamiltonian is held at its grid value
//! `H(i)`. Each interval is split into substeps and `exp(-i H tau)` is applied
//! to the state through a Chebyshev expansion, so no matrix is ever
//! exponentiated.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpoError};
use crate::hamiltonian::PathHamiltonian;
use crate::instance::QuboInstance;
use crate::pauli::SparseOperator;
use crate::schedule::{sig9, Schedule};

/// Levels of `H1` within this distance of its minimum count as ground states.
pub const GROUND_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Fixed substeps per grid interval; `None` picks the smallest count with
    /// `||H|| tau <= step_norm`.
    pub substeps: Option<usize>,
    pub step_norm: f64,
    pub drift_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            substeps: None,
            step_norm: 0.5,
            drift_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub final_state: Vec<Complex64>,
    pub p_succ: f64,
    pub norm_drift: f64,
    pub total_time: f64,
    pub steps: usize,
}

/// One row of a runtime sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub total_time: f64,
    pub p_succ: f64,
    pub norm_drift: f64,
    pub steps: usize,
}

impl From<&EvolutionResult> for SweepRow {
    fn from(r: &EvolutionResult) -> Self {
        Self {
            total_time: r.total_time,
            p_succ: r.p_succ,
            norm_drift: r.norm_drift,
            steps: r.steps,
        }
    }
}

/// CSV `T,p_succ,norm_drift,steps`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("T,p_succ,norm_drift,steps\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig9(r.total_time),
            sig9(r.p_succ),
            sig9(r.norm_drift),
            r.steps
        ));
    }
    out
}

/// The ground state of the transverse-field driver: every qubit in `|->`.
pub fn driver_ground_state(n_qubits: usize) -> Vec<Complex64> {
    let dim = 1usize << n_qubits;
    let a = 1.0 / (dim as f64).sqrt();
    (0..dim)
        .map(|b: usize| Complex64::new(if b.count_ones() % 2 == 0 { a } else { -a }, 0.0))
        .collect()
}

/// Weight of `state` on the ground space of the problem Hamiltonian.
pub fn success_probability(state: &[Complex64], inst: &QuboInstance) -> f64 {
    ground_weight(state, &inst.diagonal())
}

fn ground_weight(state: &[Complex64], problem_diagonal: &[f64]) -> f64 {
    let e0 = problem_diagonal.iter().copied().fold(f64::INFINITY, f64::min);
    let p: f64 = state
        .iter()
        .zip(problem_diagonal)
        .filter(|(_, &d)| d - e0 <= GROUND_TOLERANCE)
        .map(|(z, _)| z.norm_sqr())
        .sum();
    p.clamp(0.0, 1.0)
}

/// Evolves the driver ground state for total time `total_time`.
pub fn evolve(
    inst: &QuboInstance,
    sched: &Schedule,
    total_time: f64,
    substeps_per_interval: Option<usize>,
) -> Result<EvolutionResult> {
    if sched.n_qubits() != inst.n_qubits() {
        return Err(SpoError::QubitMismatch {
            expected: inst.n_qubits(),
            actual: sched.n_qubits(),
        });
    }
    let opts = EvolveOptions {
        substeps: substeps_per_interval,
        ..EvolveOptions::default()
    };
    evolve_on_path(&PathHamiltonian::new(inst), sched, total_time, &opts)
}

pub fn evolve_on_path(
    path: &PathHamiltonian,
    sched: &Schedule,
    total_time: f64,
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(SpoError::InvalidArgument(format!("total time must be positive, got {total_time}")));
    }
    if opts.substeps == Some(0) || !(opts.step_norm > 0.0) {
        return Err(SpoError::InvalidArgument("substeps and step norm must be positive".into()));
    }
    let n = sched.intervals();
    let dim = path.dim();
    let interval_time = total_time / n as f64;
    let init = driver_ground_state(path.n_qubits());
    let mut re: Vec<f64> = init.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = vec![0.0; dim];
    let mut work = ChebyshevWork::new(dim);
    let mut steps = 0;
    for i in 0..n {
        let op = path.at(sched, i);
        let substeps = match opts.substeps {
            Some(m) => m,
            None => ((power_norm(&op, 20) * interval_time / opts.step_norm).ceil() as usize).max(1),
        };
        let tau = interval_time / substeps as f64;
        let (lo, hi) = op.spectral_bounds();
        let coeffs = ChebyshevCoefficients::new(lo, hi, tau);
        for _ in 0..substeps {
            work.step(&op, &coeffs, &mut re, &mut im);
        }
        steps += substeps;
    }
    let final_state: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let norm = final_state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let norm_drift = (norm - 1.0).abs();
    if norm_drift > opts.drift_tolerance {
        return Err(SpoError::NormDrift {
            drift: norm_drift,
            tolerance: opts.drift_tolerance,
        });
    }
    Ok(EvolutionResult {
        p_succ: ground_weight(&final_state, path.problem_diagonal()),
        final_state,
        norm_drift,
        total_time,
        steps,
    })
}

/// Spectral-norm estimate from `iters` power iterations.
pub fn power_norm(op: &SparseOperator, iters: usize) -> f64 {
    let dim = op.dim();
    // deterministic start with no special symmetry
    let mut x: Vec<f64> = (0..dim).map(|b| 1.0 + ((b * 2654435761) % 1000) as f64 / 1000.0).collect();
    let mut y = vec![0.0; dim];
    let mut est = 0.0;
    for _ in 0..iters {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        op.apply_real(&x, &mut y);
        est = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        std::mem::swap(&mut x, &mut y);
    }
    est
}

/// Bessel values `J_0(x) .. J_{K-1}(x)` for `x >= 0`, by Miller's backward
/// recurrence normalized with `J_0 + 2 sum J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = (count + 20).max((x as usize) + 30) | 1;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut vals = vec![0.0; start + 1];
    vals[start] = cur;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        vals[k - 1] = cur;
        // rescale to dodge overflow
        if cur.abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            cur *= 1e-250;
            next *= 1e-250;
        }
    }
    for (k, v) in vals.iter().enumerate() {
        if k == 0 {
            norm += v;
        } else if k % 2 == 0 {
            norm += 2.0 * v;
        }
    }
    for (o, v) in out.iter_mut().zip(&vals) {
        *o = v / norm;
    }
    out
}

/// Expansion of `exp(-i H tau)` in Chebyshev polynomials of the rescaled
/// operator `(H - center) / radius`.
struct ChebyshevCoefficients {
    center: f64,
    radius: f64,
    phase: Complex64,
    terms: Vec<Complex64>,
}

impl ChebyshevCoefficients {
    fn new(lo: f64, hi: f64, tau: f64) -> Self {
        let center = 0.5 * (lo + hi);
        let radius = (0.5 * (hi - lo)).max(1e-300);
        let x = radius * tau;
        let max_terms = (1.5 * x) as usize + 40;
        let j = bessel_j_sequence(x, max_terms);
        let mut terms = Vec::new();
        let mut minus_i_pow = Complex64::new(1.0, 0.0);
        for (k, &jk) in j.iter().enumerate() {
            let weight = if k == 0 { 1.0 } else { 2.0 };
            terms.push(minus_i_pow * (weight * jk));
            minus_i_pow *= Complex64::new(0.0, -1.0);
            if k as f64 > x && jk.abs() < 1e-18 {
                break;
            }
        }
        Self {
            center,
            radius,
            phase: Complex64::from_polar(1.0, -center * tau),
            terms,
        }
    }
}

struct ChebyshevWork {
    prev: (Vec<f64>, Vec<f64>),
    cur: (Vec<f64>, Vec<f64>),
    next: (Vec<f64>, Vec<f64>),
    acc: (Vec<f64>, Vec<f64>),
}

impl ChebyshevWork {
    fn new(dim: usize) -> Self {
        let z = || (vec![0.0; dim], vec![0.0; dim]);
        Self {
            prev: z(),
            cur: z(),
            next: z(),
            acc: z(),
        }
    }

    /// `out = (H - c) / r * v` on both real and imaginary parts.
    fn apply_scaled(op: &SparseOperator, c: &ChebyshevCoefficients, v: &(Vec<f64>, Vec<f64>), out: &mut (Vec<f64>, Vec<f64>)) {
        op.apply_real(&v.0, &mut out.0);
        op.apply_real(&v.1, &mut out.1);
        let inv = 1.0 / c.radius;
        for (o, x) in out.0.iter_mut().zip(&v.0) {
            *o = (*o - c.center * x) * inv;
        }
        for (o, x) in out.1.iter_mut().zip(&v.1) {
            *o = (*o - c.center * x) * inv;
        }
    }

    fn accumulate(acc: &mut (Vec<f64>, Vec<f64>), coef: Complex64, v: &(Vec<f64>, Vec<f64>)) {
        let (a, b) = (coef.re, coef.im);
        for k in 0..acc.0.len() {
            let (x, y) = (v.0[k], v.1[k]);
            acc.0[k] += a * x - b * y;
            acc.1[k] += a * y + b * x;
        }
    }

    fn step(&mut self, op: &SparseOperator, c: &ChebyshevCoefficients, re: &mut [f64], im: &mut [f64]) {
        self.prev.0.copy_from_slice(re);
        self.prev.1.copy_from_slice(im);
        self.acc.0.iter_mut().for_each(|v| *v = 0.0);
        self.acc.1.iter_mut().for_each(|v| *v = 0.0);
        Self::accumulate(&mut self.acc, c.terms[0], &self.prev);
        if c.terms.len() > 1 {
            Self::apply_scaled(op, c, &self.prev, &mut self.cur);
            Self::accumulate(&mut self.acc, c.terms[1], &self.cur);
        }
        for &t in &c.terms[2.min(c.terms.len())..] {
            Self::apply_scaled(op, c, &self.cur, &mut self.next);
            for k in 0..re.len() {
                self.next.0[k] = 2.0 * self.next.0[k] - self.prev.0[k];
                self.next.1[k] = 2.0 * self.next.1[k] - self.prev.1[k];
            }
            Self::accumulate(&mut self.acc, t, &self.next);
            std::mem::swap(&mut self.prev, &mut self.cur);
            std::mem::swap(&mut self.cur, &mut self.next);
        }
        let p = c.phase;
        for k in 0..re.len() {
            let z = Complex64::new(self.acc.0[k], self.acc.1[k]) * p;
            re[k] = z.re;
            im[k] = z.im;
        }
    }
}

/// `exp(-i H tau) psi` for a real symmetric operator.
pub fn propagate(op: &SparseOperator, psi: &[Complex64], tau: f64) -> Vec<Complex64> {
    let (lo, hi) = op.spectral_bounds();
    let coeffs = ChebyshevCoefficients::new(lo, hi, tau);
    let mut re: Vec<f64> = psi.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = psi.iter().map(|z| z.im).collect();
    ChebyshevWork::new(psi.len()).step(op, &coeffs, &mut re, &mut im);
    re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bessel_values() {
        // J_0(1), J_1(1), J_2(1) from tables
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((j[2] - 0.114_903_484_931_900_5).abs() < 1e-15);
        let j = bessel_j_sequence(10.0, 2);
        assert!((j[0] + 0.245_935_764_451_348_3).abs() < 1e-14);
        assert_eq!(bessel_j_sequence(0.0, 3), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rabi_rotation_under_z() {
        // H = Z, psi(0) = |+>, after time pi/2 the state is -i|->
        let z = SparseOperator::from_diagonal(1, vec![1.0, -1.0]);
        let plus = [Complex64::new(1.0 / 2f64.sqrt(), 0.0); 2];
        for (t, expect_minus) in [(PI / 2.0, 1.0), (PI, 0.0), (PI / 4.0, 0.5)] {
            let out = propagate(&z, &plus, t);
            let minus_overlap = (out[0] - out[1]) / 2f64.sqrt();
            assert!((minus_overlap.norm_sqr() - expect_minus).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn initial_state_is_driver_ground_state() {
        let psi = driver_ground_state(3);
        let x = crate::hamiltonian::build_driver_hamiltonian(3).unwrap();
        let mut y = vec![Complex64::new(0.0, 0.0); 8];
        x.realize().apply_complex(&psi, &mut y);
        for (a, b) in y.iter().zip(&psi) {
            assert!((a + 3.0 * b).norm() < 1e-15);
        }
    }

    #[test]
    fn degenerate_problem_always_succeeds() {
        let inst = QuboInstance::trivial(3).unwrap();
        let sched = Schedule::linear(3, 10, 1.0, 1.0).unwrap();
        for t in [1.0, 7.0] {
            let r = evolve(&inst, &sched, t, None).unwrap();
            assert!((r.p_succ - 1.0).abs() < 1e-12);
            assert!(r.norm_drift < 1e-12);
        }
    }

    #[test]
    fn success_probability_extremes() {
        let inst = QuboInstance::new(1, vec![1.0], std::iter::empty(), 0).unwrap();
        // ground state of Z is |1>
        let one = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert_eq!(success_probability(&one, &inst), 1.0);
        assert_eq!(success_probability(&zero, &inst), 0.0);
    }

    #[test]
    fn slow_sweep_is_adiabatic() {
        let inst = QuboInstance::new(1, vec![1.0], std::iter::empty(), 0).unwrap();
        let sched = Schedule::linear(1, 200, 1.0, 1.0).unwrap();
        let r = evolve(&inst, &sched, 200.0, None).unwrap();
        assert!(r.p_succ > 0.999, "{}", r.p_succ);
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = [SweepRow {
            total_time: 10.0,
            p_succ: 0.5,
            norm_drift: 0.0,
            steps: 12,
        }];
        assert_eq!(sweep_csv(&rows), "T,p_succ,norm_drift,steps\n1.00000000e1,5.00000000e-1,0,12\n");
    }
}
