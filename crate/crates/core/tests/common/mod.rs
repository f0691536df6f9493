//! Independent dense reference built from Kronecker products with nalgebra.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use spo_core::{QuboInstance, Schedule};

fn pauli_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

fn pauli_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `ops` placed on the given qubits, identity elsewhere; qubit 0 is the
/// leftmost factor.
pub fn embed(n: usize, ops: &[(usize, DMatrix<f64>)]) -> DMatrix<f64> {
    let mut out = DMatrix::from_element(1, 1, 1.0);
    for q in 0..n {
        let factor = ops
            .iter()
            .find(|(p, _)| *p == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| DMatrix::identity(2, 2));
        out = out.kronecker(&factor);
    }
    out
}

pub fn x_on(n: usize, q: usize) -> DMatrix<f64> {
    embed(n, &[(q, pauli_x())])
}

pub fn z_on(n: usize, q: usize) -> DMatrix<f64> {
    embed(n, &[(q, pauli_z())])
}

pub fn driver(n: usize) -> DMatrix<f64> {
    (0..n).fold(DMatrix::zeros(1 << n, 1 << n), |acc, q| acc + x_on(n, q))
}

pub fn problem(inst: &QuboInstance) -> DMatrix<f64> {
    let n = inst.n_qubits();
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for (q, &hq) in inst.fields().iter().enumerate() {
        h += z_on(n, q) * hq;
    }
    for (a, b, j) in inst.couplings() {
        h += embed(n, &[(a, pauli_z()), (b, pauli_z())]) * j;
    }
    h
}

/// `(1 - s) H0 + sum_q (fx X_q + fz Z_q) + s H1` at grid point `i`.
pub fn hamiltonian(inst: &QuboInstance, sched: &Schedule, i: usize) -> DMatrix<f64> {
    let n = inst.n_qubits();
    let s = i as f64 / sched.intervals() as f64;
    let mut h = driver(n) * (1.0 - s) + problem(inst) * s;
    for q in 0..n {
        h += x_on(n, q) * sched.value(2 * q, i);
        h += z_on(n, q) * sched.value(2 * q + 1, i);
    }
    h
}

pub fn sorted_eigenvalues(h: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// A schedule with nonzero local terms everywhere inside the path.
pub fn bumpy_schedule(n: usize, intervals: usize, seed: u64) -> Schedule {
    let mut rng = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    let mut next = move || {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        (rng >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let values = (0..2 * n)
        .map(|_| {
            let (a, b) = (next(), next());
            (0..=intervals)
                .map(|i| {
                    let s = i as f64 / intervals as f64;
                    s * (1.0 - s) * (a + b * s)
                })
                .collect()
        })
        .collect();
    Schedule::from_table(n, values, 10.0, 10.0).unwrap()
}
