//! QUBO problem instances in Ising form: `H1 = sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j`.

use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpoError};

/// Ising coefficients of a QUBO problem plus the seed that generated them.
///
/// `J` is stored dense and strictly upper triangular: `coupling(i, j)` is
/// nonzero only for `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    n_qubits: usize,
    h: Vec<f64>,
    j: Vec<f64>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    h: Vec<f64>,
    #[serde(rename = "J")]
    j: Vec<(usize, usize, f64)>,
    #[serde(default)]
    seed: u64,
}

impl QuboInstance {
    /// Builds an instance from fields and couplings given as `(i, j, value)`.
    ///
    /// Couplings may name either ordering of a pair; `(i, j)` and `(j, i)` are
    /// summed into the upper triangle. Self-couplings are rejected.
    pub fn new(
        n_qubits: usize,
        h: Vec<f64>,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
        seed: u64,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(SpoError::InvalidArgument("instance needs at least one qubit".into()));
        }
        if h.len() != n_qubits {
            return Err(SpoError::InvalidArgument(format!(
                "expected {n_qubits} local fields, got {}",
                h.len()
            )));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(SpoError::InvalidArgument("non-finite local field".into()));
        }
        let mut j = vec![0.0; n_qubits * n_qubits];
        for (a, b, v) in couplings {
            if a >= n_qubits || b >= n_qubits {
                return Err(SpoError::InvalidArgument(format!(
                    "coupling ({a}, {b}) out of range for {n_qubits} qubits"
                )));
            }
            if a == b {
                return Err(SpoError::InvalidArgument(format!("self-coupling on qubit {a}")));
            }
            if !v.is_finite() {
                return Err(SpoError::InvalidArgument(format!("non-finite coupling ({a}, {b})")));
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            j[lo * n_qubits + hi] += v;
        }
        Ok(Self {
            n_qubits,
            h,
            j,
            seed,
        })
    }

    /// Draws every `h_i` and `J_ij` (`i < j`, row-major) uniformly from `[-1, 1)`.
    pub fn random(n_qubits: usize, seed: u64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(SpoError::InvalidArgument("instance needs at least one qubit".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = (0..n_qubits)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect::<Vec<f64>>();
        let mut couplings = Vec::new();
        for a in 0..n_qubits {
            for b in a + 1..n_qubits {
                couplings.push((a, b, rng.random_range(-1.0..1.0)));
            }
        }
        Self::new(n_qubits, h, couplings, seed)
    }

    /// The all-zero instance: every basis state is a ground state of `H1`.
    pub fn trivial(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, vec![0.0; n_qubits], std::iter::empty(), 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i < j {
            self.j[i * self.n_qubits + j]
        } else {
            0.0
        }
    }

    /// Nonzero couplings as sorted `(i, j, J_ij)` with `i < j`.
    pub fn couplings(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_qubits;
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let v = self.j[a * n + b];
                if v != 0.0 {
                    out.push((a, b, v));
                }
            }
        }
        out
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `max(|h_i|, |J_ij|)`, the default amplitude cap for intermediate terms.
    pub fn max_coefficient(&self) -> f64 {
        self.h
            .iter()
            .chain(self.j.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Energy of a spin configuration, `z_q = +1` for bit 0 of qubit `q`.
    pub fn energy(&self, spins: &[i8]) -> f64 {
        let n = self.n_qubits;
        let mut e = 0.0;
        for a in 0..n {
            e += self.h[a] * f64::from(spins[a]);
            for b in a + 1..n {
                e += self.j[a * n + b] * f64::from(spins[a] * spins[b]);
            }
        }
        e
    }

    /// Diagonal of `H1` in the computational basis (qubit 0 is the most
    /// significant bit of the basis index).
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let dim = 1usize << n;
        let mut diag = vec![0.0; dim];
        let mut z = vec![0.0; n];
        for (b, d) in diag.iter_mut().enumerate() {
            for (q, zq) in z.iter_mut().enumerate() {
                *zq = if (b >> (n - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
            }
            let mut e = 0.0;
            for a in 0..n {
                e += self.h[a] * z[a];
            }
            for a in 0..n {
                for c in a + 1..n {
                    let v = self.j[a * n + c];
                    if v != 0.0 {
                        e += v * z[a] * z[c];
                    }
                }
            }
            *d = e;
        }
        diag
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            n: self.n_qubits,
            h: self.h.clone(),
            j: self.couplings(),
            seed: self.seed,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| SpoError::parse("instance JSON", format!("line {} column {}: {e}", e.line(), e.column())))?;
        Self::new(file.n, file.h, file.j, file.seed)
            .map_err(|e| SpoError::parse("instance JSON", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SpoError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            SpoError::Parse { context, message } => SpoError::Parse {
                context: format!("{} ({context})", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::manifest::write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_coefficients_are_in_unit_interval_and_reproducible() {
        let a = QuboInstance::random(6, 17).unwrap();
        let b = QuboInstance::random(6, 17).unwrap();
        assert_eq!(a, b);
        assert!(a.fields().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(a.couplings().len(), 15);
        assert!(a.couplings().iter().all(|&(i, j, v)| i < j && (-1.0..=1.0).contains(&v)));
        assert_ne!(a, QuboInstance::random(6, 18).unwrap());
    }

    #[test]
    fn symmetric_couplings_fold_into_upper_triangle() {
        let inst = QuboInstance::new(3, vec![0.0; 3], [(0, 2, 0.5), (2, 0, 0.25), (1, 0, -1.0)], 0).unwrap();
        assert_eq!(inst.coupling(0, 2), 0.75);
        assert_eq!(inst.coupling(0, 1), -1.0);
        assert_eq!(inst.coupling(2, 0), 0.0);
        assert!(QuboInstance::new(2, vec![0.0; 2], [(1, 1, 1.0)], 0).is_err());
        assert!(QuboInstance::new(2, vec![0.0; 3], [], 0).is_err());
    }

    #[test]
    fn json_round_trip_and_sorted_writer() {
        let inst = QuboInstance::new(3, vec![0.1, -0.2, 0.3], [(2, 1, 0.4), (0, 1, -0.5)], 9).unwrap();
        let text = inst.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["J"][0][0], 0);
        assert_eq!(v["J"][0][1], 1);
        assert_eq!(v["J"][1][0], 1);
        assert_eq!(v["J"][1][1], 2);
        assert_eq!(QuboInstance::from_json(&text).unwrap(), inst);
    }

    #[test]
    fn malformed_json_names_location() {
        let err = QuboInstance::from_json("{\"n\": 2, \"h\": [0.1,\n \"x\"], \"J\": []}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(err.is_io_or_schema());
    }

    #[test]
    fn diagonal_matches_spin_energy() {
        let inst = QuboInstance::random(4, 3).unwrap();
        let diag = inst.diagonal();
        for (b, &d) in diag.iter().enumerate() {
            let spins: Vec<i8> = (0..4).map(|q| if (b >> (3 - q)) & 1 == 0 { 1 } else { -1 }).collect();
            assert!((inst.energy(&spins) - d).abs() < 1e-14);
        }
    }
}
