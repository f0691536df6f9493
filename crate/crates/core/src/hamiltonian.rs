//! Driver, problem and intermediate Hamiltonians, and their assembly along a
//! schedule: `H(i) = (1 - s) H0 + sum_j f_j(i) H_j + s H1` with `s = i / N`.

use crate::error::{Result, SpoError};
use crate::instance::QuboInstance;
use crate::pauli::{Axis, PauliOperator, PauliTerm, SparseOperator};
use crate::schedule::{local_term, local_term_count, Schedule};

/// `H1 = sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j`.
pub fn build_final_hamiltonian(inst: &QuboInstance) -> Result<PauliOperator> {
    let n = inst.n_qubits();
    let fields = inst
        .fields()
        .iter()
        .enumerate()
        .map(|(q, &h)| PauliTerm::single(h, q, Axis::Z));
    let couplings = inst
        .couplings()
        .into_iter()
        .map(|(a, b, v)| PauliTerm::new(v, [(a, Axis::Z), (b, Axis::Z)]));
    let couplings = couplings.collect::<Result<Vec<_>>>()?;
    PauliOperator::new(n, fields.chain(couplings))
}

/// Transverse-field driver `H0 = sum_i X_i`.
pub fn build_driver_hamiltonian(n_qubits: usize) -> Result<PauliOperator> {
    if n_qubits == 0 {
        return Err(SpoError::InvalidArgument("driver needs at least one qubit".into()));
    }
    PauliOperator::new(n_qubits, (0..n_qubits).map(|q| PauliTerm::single(1.0, q, Axis::X)))
}

/// The `2n` local intermediate terms `X_0, Z_0, X_1, Z_1, …`.
pub fn build_local_basis(n_qubits: usize) -> Result<Vec<PauliOperator>> {
    if n_qubits == 0 {
        return Err(SpoError::InvalidArgument("basis needs at least one qubit".into()));
    }
    (0..local_term_count(n_qubits))
        .map(|j| {
            let (q, axis) = local_term(j);
            PauliOperator::new(n_qubits, [PauliTerm::single(1.0, q, axis)])
        })
        .collect()
}

/// Driver and problem weights `(1 - i/N, i/N)`, exact at both ends.
pub fn endpoint_weights(i: usize, intervals: usize) -> (f64, f64) {
    let n = intervals as f64;
    ((intervals - i) as f64 / n, i as f64 / n)
}

fn check_grid(inst: &QuboInstance, sched: &Schedule, i: usize) -> Result<()> {
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
    Ok(())
}

/// The full Hamiltonian at grid point `i` as a Pauli sum.
pub fn assemble(inst: &QuboInstance, sched: &Schedule, i: usize) -> Result<PauliOperator> {
    check_grid(inst, sched, i)?;
    let n = inst.n_qubits();
    let (w0, w1) = endpoint_weights(i, sched.intervals());
    let h0 = build_driver_hamiltonian(n)?;
    let h1 = build_final_hamiltonian(inst)?;
    let mut terms: Vec<PauliTerm> = Vec::new();
    terms.extend(h0.scaled(w0).terms().iter().cloned());
    for j in 0..sched.n_terms() {
        let (q, axis) = local_term(j);
        terms.push(PauliTerm::single(sched.value(j, i), q, axis));
    }
    terms.extend(h1.scaled(w1).terms().iter().cloned());
    PauliOperator::new(n, terms)
}

/// Realizes `H(i)` directly from the problem diagonal, skipping the Pauli
/// bookkeeping of [`assemble`]. Used on the hot paths (spectra, dynamics,
/// optimizers); agrees with `assemble(..).realize()` entrywise.
#[derive(Debug, Clone)]
pub struct PathHamiltonian {
    n_qubits: usize,
    problem_diagonal: Vec<f64>,
    z_signs: Vec<Vec<f64>>,
}

impl PathHamiltonian {
    pub fn new(inst: &QuboInstance) -> Self {
        let n = inst.n_qubits();
        let dim = 1usize << n;
        let z_signs = (0..n)
            .map(|q| {
                (0..dim)
                    .map(|b| if (b >> (n - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        Self {
            n_qubits: n,
            problem_diagonal: inst.diagonal(),
            z_signs,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn problem_diagonal(&self) -> &[f64] {
        &self.problem_diagonal
    }

    /// `sign_q(b)` of `Z_q` on basis state `b`.
    pub fn z_sign(&self, qubit: usize) -> &[f64] {
        &self.z_signs[qubit]
    }

    /// `w0 H0 + w1 H1 + sum_j column[j] H_j`.
    pub fn realize(&self, w0: f64, w1: f64, column: &[f64]) -> SparseOperator {
        let n = self.n_qubits;
        assert_eq!(column.len(), local_term_count(n));
        let mut diagonal: Vec<f64> = self.problem_diagonal.iter().map(|d| w1 * d).collect();
        for q in 0..n {
            let fz = column[2 * q + 1];
            if fz != 0.0 {
                for (d, s) in diagonal.iter_mut().zip(&self.z_signs[q]) {
                    *d += fz * s;
                }
            }
        }
        let mut op = SparseOperator::from_diagonal(n, diagonal);
        let fields: Vec<f64> = (0..n).map(|q| w0 + column[2 * q]).collect();
        op.set_transverse_fields(&fields);
        op
    }

    /// `<u|H_j|v>` for every local term `H_j`, in basis order.
    pub fn local_matrix_elements(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n_qubits;
        let mut out = Vec::with_capacity(2 * n);
        for q in 0..n {
            let mask = 1usize << (n - 1 - q);
            let x: f64 = (0..u.len()).map(|b| u[b] * v[b ^ mask]).sum();
            let z: f64 = self.z_signs[q].iter().zip(u.iter().zip(v)).map(|(s, (a, b))| s * a * b).sum();
            out.push(x);
            out.push(z);
        }
        out
    }

    /// `<u|H_j|u>` for every local term.
    pub fn local_expectations(&self, u: &[f64]) -> Vec<f64> {
        self.local_matrix_elements(u, u)
    }

    /// `H(i)` of a schedule.
    pub fn at(&self, sched: &Schedule, i: usize) -> SparseOperator {
        let (w0, w1) = endpoint_weights(i, sched.intervals());
        self.realize(w0, w1, &sched.column(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::QuboInstance;

    #[test]
    fn final_hamiltonian_small_cases() {
        let one = QuboInstance::new(1, vec![0.5], [], 0).unwrap();
        let h1 = build_final_hamiltonian(&one).unwrap();
        assert_eq!(h1.realize().diagonal(), &[0.5, -0.5]);
        assert!(h1.realize().is_diagonal());

        let pair = QuboInstance::new(2, vec![0.0, 0.0], [(0, 1, 1.0)], 0).unwrap();
        let h1 = build_final_hamiltonian(&pair).unwrap();
        assert_eq!(h1.realize().diagonal(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn driver_and_basis_shapes() {
        assert!(build_driver_hamiltonian(0).is_err());
        assert!(build_local_basis(0).is_err());
        let basis = build_local_basis(1).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(basis[0].terms()[0].factors(), &[(0, Axis::X)]);
        assert_eq!(basis[1].terms()[0].factors(), &[(0, Axis::Z)]);
        assert_eq!(build_local_basis(10).unwrap().len(), 20);
    }

    #[test]
    fn local_terms_square_to_identity() {
        for op in build_local_basis(3).unwrap() {
            let m = op.realize();
            let dim = m.dim();
            let dense = m.to_dense_real();
            for r in 0..dim {
                for c in 0..dim {
                    let sq: f64 = (0..dim).map(|k| dense[r * dim + k] * dense[k * dim + c]).sum();
                    assert_eq!(sq, if r == c { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn assemble_hits_endpoints_exactly() {
        let inst = QuboInstance::random(3, 11).unwrap();
        let mut sched = Schedule::linear(3, 10, 1.0, 2.5).unwrap();
        sched.set(2, 5, 0.1);
        let h0 = build_driver_hamiltonian(3).unwrap();
        let h1 = build_final_hamiltonian(&inst).unwrap();
        assert_eq!(assemble(&inst, &sched, 0).unwrap(), h0);
        assert_eq!(assemble(&inst, &sched, 10).unwrap(), h1);
        assert!(matches!(assemble(&inst, &sched, 11), Err(SpoError::GridIndex { .. })));
        let other = Schedule::linear(2, 10, 1.0, 2.5).unwrap();
        assert!(matches!(assemble(&inst, &other, 1), Err(SpoError::QubitMismatch { .. })));
    }

    #[test]
    fn fast_path_matches_pauli_assembly() {
        let inst = QuboInstance::random(4, 5).unwrap();
        let mut sched = Schedule::linear(4, 8, 1.0, 10.0).unwrap();
        for j in 0..8 {
            for i in 1..8 {
                sched.set(j, i, 0.1 * ((j * 7 + i * 3) % 5) as f64 - 0.2);
            }
        }
        let path = PathHamiltonian::new(&inst);
        for i in 0..=8 {
            let slow = assemble(&inst, &sched, i).unwrap();
            let fast = path.at(&sched, i);
            assert!(slow.realize().max_abs_difference(&fast) < 1e-14, "i = {i}");
        }
    }

    #[test]
    fn local_matrix_elements_match_basis_operators() {
        let inst = QuboInstance::random(3, 2).unwrap();
        let path = PathHamiltonian::new(&inst);
        let u: Vec<f64> = (0..8).map(|b| ((b * 5 + 1) as f64).sin()).collect();
        let v: Vec<f64> = (0..8).map(|b| ((b * 3 + 2) as f64).cos()).collect();
        let got = path.local_matrix_elements(&u, &v);
        for (j, op) in build_local_basis(3).unwrap().iter().enumerate() {
            let mut hv = vec![0.0; 8];
            op.realize().apply_real(&v, &mut hv);
            let expect: f64 = u.iter().zip(&hv).map(|(a, b)| a * b).sum();
            assert!((got[j] - expect).abs() < 1e-14, "term {j}");
        }
    }
}
