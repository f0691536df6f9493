//! Weighted sums of Pauli strings and their sparse matrix realization.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of a basis index, so
//! qubit 0 is the leftmost tensor factor and `|b>` with `b = 0` is `|00…0>`.
//! Every Pauli string maps a basis state to a single basis state,
//!
//! ```text
//! P |b> = i^{#Y} (-1)^{popcount(b & zy_mask)} |b ^ xy_mask>
//! ```
//!
//! so a realized operator is stored as one diagonal plus one value vector per
//! distinct flip mask ("XOR-diagonals"). A QUBO Hamiltonian realizes to a
//! single diagonal vector; a transverse-field term to one flip block per qubit.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpoError};

/// Largest register the dense helpers will build (`2^12 x 2^12`).
pub const MAX_DENSE_QUBITS: usize = 12;

/// Largest register any realization will allocate.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// A real coefficient times a tensor product of single-qubit Paulis.
///
/// Factors are kept sorted by qubit index with no qubit repeated. An empty
/// factor list is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    coefficient: f64,
    factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    /// Builds a term, sorting the factors. Repeated qubits are rejected since
    /// products of Paulis on one qubit are not simplified here.
    pub fn new(coefficient: f64, factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        let mut factors: Vec<(usize, Axis)> = factors.into_iter().collect();
        factors.sort_by_key(|&(q, _)| q);
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SpoError::InvalidArgument(format!(
                "repeated qubit index in Pauli term {factors:?}"
            )));
        }
        if !coefficient.is_finite() {
            return Err(SpoError::InvalidArgument(format!(
                "non-finite Pauli coefficient {coefficient}"
            )));
        }
        Ok(Self {
            coefficient,
            factors,
        })
    }

    pub fn identity(coefficient: f64) -> Self {
        Self {
            coefficient,
            factors: Vec::new(),
        }
    }

    /// `c * sigma_axis^qubit`.
    pub fn single(coefficient: f64, qubit: usize, axis: Axis) -> Self {
        Self {
            coefficient,
            factors: vec![(qubit, axis)],
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    fn max_qubit(&self) -> Option<usize> {
        self.factors.last().map(|&(q, _)| q)
    }

    /// Bit masks `(flip, phase, y_count)` for an `n`-qubit register.
    fn masks(&self, n_qubits: usize) -> (usize, usize, usize) {
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut ys = 0usize;
        for &(q, axis) in &self.factors {
            let bit = 1usize << (n_qubits - 1 - q);
            match axis {
                Axis::X => flip |= bit,
                Axis::Z => phase |= bit,
                Axis::Y => {
                    flip |= bit;
                    phase |= bit;
                    ys += 1;
                }
            }
        }
        (flip, phase, ys)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        if self.factors.is_empty() {
            return write!(f, " I");
        }
        for (q, a) in &self.factors {
            write!(f, " {a}{q}")?;
        }
        Ok(())
    }
}

/// A Hermitian operator `sum_k c_k P_k` on `n_qubits` qubits.
///
/// Terms with identical factor lists are merged on construction and exact
/// zeros are dropped. The sparse realization is built on first use and cached;
/// concurrent first calls may race to build it but all observe the same value.
#[derive(Debug, Clone)]
pub struct PauliOperator {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    realized: OnceLock<SparseOperator>,
}

impl PartialEq for PauliOperator {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits && self.terms == other.terms
    }
}

impl PauliOperator {
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(SpoError::InvalidArgument("operator needs at least one qubit".into()));
        }
        if n_qubits > MAX_QUBITS {
            return Err(SpoError::InvalidArgument(format!(
                "{n_qubits} qubits exceeds the supported maximum of {MAX_QUBITS}"
            )));
        }
        let mut merged: BTreeMap<Vec<(usize, Axis)>, f64> = BTreeMap::new();
        for term in terms {
            if let Some(q) = term.max_qubit() {
                if q >= n_qubits {
                    return Err(SpoError::InvalidArgument(format!(
                        "qubit index {q} out of range for {n_qubits} qubits"
                    )));
                }
            }
            *merged.entry(term.factors).or_insert(0.0) += term.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(factors, coefficient)| PauliTerm {
                coefficient,
                factors,
            })
            .collect();
        Ok(Self {
            n_qubits,
            terms,
            realized: OnceLock::new(),
        })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, std::iter::empty())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// True when no term contains an odd number of `Y` factors, i.e. the
    /// realization is a real symmetric matrix.
    pub fn is_real(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.factors.iter().filter(|(_, a)| *a == Axis::Y).count() % 2 == 0)
    }

    /// True when every term is a product of `Z` factors (or the identity).
    pub fn is_diagonal(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.factors.iter().all(|(_, a)| *a == Axis::Z))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm {
                coefficient: t.coefficient * factor,
                factors: t.factors.clone(),
            })
            .collect::<Vec<_>>();
        Self::new(self.n_qubits, terms).expect("scaling preserves validity")
    }

    /// `sum_k w_k O_k` over operators sharing one register.
    pub fn linear_combination<'a>(
        n_qubits: usize,
        parts: impl IntoIterator<Item = (f64, &'a PauliOperator)>,
    ) -> Result<Self> {
        let mut terms = Vec::new();
        for (w, op) in parts {
            if op.n_qubits != n_qubits {
                return Err(SpoError::QubitMismatch {
                    expected: n_qubits,
                    actual: op.n_qubits,
                });
            }
            if w == 0.0 {
                continue;
            }
            terms.extend(op.terms.iter().map(|t| PauliTerm {
                coefficient: w * t.coefficient,
                factors: t.factors.clone(),
            }));
        }
        Self::new(n_qubits, terms)
    }

    pub fn realize(&self) -> &SparseOperator {
        self.realized
            .get_or_init(|| SparseOperator::from_terms(self.n_qubits, &self.terms))
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Off-diagonal part of a realization sharing one flip mask:
/// `M[b ^ mask][b] = re[b] + i im[b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipBlock {
    pub mask: usize,
    pub re: Vec<f64>,
    pub im: Option<Vec<f64>>,
}

/// Sparse matrix form of a [`PauliOperator`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n_qubits: usize,
    diagonal: Vec<f64>,
    flips: Vec<FlipBlock>,
}

impl SparseOperator {
    fn from_terms(n_qubits: usize, terms: &[PauliTerm]) -> Self {
        let dim = 1usize << n_qubits;
        let mut diagonal = vec![0.0; dim];
        let mut blocks: BTreeMap<usize, FlipBlock> = BTreeMap::new();
        for term in terms {
            let (flip, phase, ys) = term.masks(n_qubits);
            let c = term.coefficient;
            // i^{ys}: real for even, imaginary for odd, with sign (-1)^{ys/2}
            let sign = if (ys / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let imaginary = ys % 2 == 1;
            let signed = |b: usize| -> f64 {
                if (b & phase).count_ones() % 2 == 0 {
                    sign * c
                } else {
                    -sign * c
                }
            };
            if flip == 0 {
                for (b, d) in diagonal.iter_mut().enumerate() {
                    *d += signed(b);
                }
                continue;
            }
            let block = blocks.entry(flip).or_insert_with(|| FlipBlock {
                mask: flip,
                re: vec![0.0; dim],
                im: None,
            });
            if imaginary {
                let im = block.im.get_or_insert_with(|| vec![0.0; dim]);
                for (b, v) in im.iter_mut().enumerate() {
                    *v += signed(b);
                }
            } else {
                for (b, v) in block.re.iter_mut().enumerate() {
                    *v += signed(b);
                }
            }
        }
        Self {
            n_qubits,
            diagonal,
            flips: blocks.into_values().collect(),
        }
    }

    /// A purely diagonal operator.
    pub fn from_diagonal(n_qubits: usize, diagonal: Vec<f64>) -> Self {
        assert_eq!(diagonal.len(), 1 << n_qubits);
        Self {
            n_qubits,
            diagonal,
            flips: Vec::new(),
        }
    }

    /// Replaces the off-diagonal part with `sum_q fields[q] X_q`.
    pub fn set_transverse_fields(&mut self, fields: &[f64]) {
        assert_eq!(fields.len(), self.n_qubits);
        let dim = self.dim();
        self.flips = fields
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &a)| a != 0.0)
            .map(|(q, &a)| FlipBlock {
                mask: 1 << (self.n_qubits - 1 - q),
                re: vec![a; dim],
                im: None,
            })
            .collect();
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn flip_blocks(&self) -> &[FlipBlock] {
        &self.flips
    }

    pub fn is_diagonal(&self) -> bool {
        self.flips.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.flips.iter().all(|b| b.im.is_none())
    }

    /// Number of stored (possibly zero) entries.
    pub fn stored_entries(&self) -> usize {
        self.dim() * (1 + self.flips.len())
    }

    /// `y = M x` for a real symmetric realization.
    ///
    /// Panics if the operator has imaginary entries.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        assert!(self.is_real(), "apply_real on a complex operator");
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for ((yi, &d), &xi) in y.iter_mut().zip(&self.diagonal).zip(x) {
            *yi = d * xi;
        }
        for block in &self.flips {
            let m = block.mask;
            for (b, (&v, &xb)) in block.re.iter().zip(x).enumerate() {
                y[b ^ m] += v * xb;
            }
        }
    }

    /// `y = M x` for any realization.
    pub fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim());
        for ((yi, &d), &xi) in y.iter_mut().zip(&self.diagonal).zip(x) {
            *yi = xi * d;
        }
        for block in &self.flips {
            let m = block.mask;
            match &block.im {
                None => {
                    for (b, (&v, &xb)) in block.re.iter().zip(x).enumerate() {
                        y[b ^ m] += xb * v;
                    }
                }
                Some(im) => {
                    for b in 0..x.len() {
                        y[b ^ m] += x[b] * Complex64::new(block.re[b], im[b]);
                    }
                }
            }
        }
    }

    /// `<x|M|x>` for a real vector.
    pub fn expectation_real(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply_real(x, &mut y);
        dot(x, &y)
    }

    /// Row-major dense matrix (real part only). Panics above [`MAX_DENSE_QUBITS`].
    pub fn to_dense_real(&self) -> Vec<f64> {
        assert!(self.n_qubits <= MAX_DENSE_QUBITS, "dense realization too large");
        assert!(self.is_real(), "to_dense_real on a complex operator");
        let dim = self.dim();
        let mut m = vec![0.0; dim * dim];
        for (b, &d) in self.diagonal.iter().enumerate() {
            m[b * dim + b] = d;
        }
        for block in &self.flips {
            for (b, &v) in block.re.iter().enumerate() {
                m[(b ^ block.mask) * dim + b] += v;
            }
        }
        m
    }

    /// Row-major dense complex matrix. Panics above [`MAX_DENSE_QUBITS`].
    pub fn to_dense(&self) -> Vec<Complex64> {
        assert!(self.n_qubits <= MAX_DENSE_QUBITS, "dense realization too large");
        let dim = self.dim();
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (b, &d) in self.diagonal.iter().enumerate() {
            m[b * dim + b] = Complex64::new(d, 0.0);
        }
        for block in &self.flips {
            for b in 0..dim {
                let im = block.im.as_ref().map_or(0.0, |v| v[b]);
                m[(b ^ block.mask) * dim + b] += Complex64::new(block.re[b], im);
            }
        }
        m
    }

    /// Largest `|M[r][c] - conj(M[c][r])|` over stored entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for block in &self.flips {
            let m = block.mask;
            for b in 0..self.dim() {
                let re = block.re[b] - block.re[b ^ m];
                let im = block.im.as_ref().map_or(0.0, |v| v[b] + v[b ^ m]);
                worst = worst.max(re.abs()).max(im.abs());
            }
        }
        worst
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.dim()];
        for block in &self.flips {
            for b in 0..self.dim() {
                let im = block.im.as_ref().map_or(0.0, |v| v[b]);
                radius[b ^ block.mask] += block.re[b].hypot(im);
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (&d, &r) in self.diagonal.iter().zip(&radius) {
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    /// Max-norm of `self - other` over all matrix entries.
    pub fn max_abs_difference(&self, other: &SparseOperator) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let mut worst: f64 = self
            .diagonal
            .iter()
            .zip(&other.diagonal)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mut masks: Vec<usize> = self
            .flips
            .iter()
            .chain(&other.flips)
            .map(|b| b.mask)
            .collect();
        masks.sort_unstable();
        masks.dedup();
        let zeros = vec![0.0; self.dim()];
        for m in masks {
            let find = |op: &'_ SparseOperator| op.flips.iter().find(|b| b.mask == m).cloned();
            let a = find(self);
            let b = find(other);
            let a_re = a.as_ref().map_or(&zeros, |x| &x.re);
            let b_re = b.as_ref().map_or(&zeros, |x| &x.re);
            let a_im = a.as_ref().and_then(|x| x.im.as_ref()).unwrap_or(&zeros);
            let b_im = b.as_ref().and_then(|x| x.im.as_ref()).unwrap_or(&zeros);
            for k in 0..self.dim() {
                let d = Complex64::new(a_re[k] - b_re[k], a_im[k] - b_im[k]).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
