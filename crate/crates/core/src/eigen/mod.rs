//! Low-lying eigenpairs of Hermitian operators.
//!
//! Two interchangeable real symmetric paths: a dense Householder/QL solver
//! and a sparse Lanczos solver. [`EigenMethod::Auto`] takes the dense path for
//! small matrices and Lanczos otherwise. Complex Hermitian operators go
//! through the real embedding `[[A, -B], [B, A]]` of `A + iB`.

pub mod dense;
pub mod lanczos;

use num_complex::Complex64;

use crate::error::{Result, SpoError};
use crate::pauli::{PauliOperator, SparseOperator};

pub use lanczos::LanczosOptions;

/// Dimension at or below which [`EigenMethod::Auto`] diagonalizes densely.
pub const DENSE_AUTO_LIMIT: usize = 64;

/// A real symmetric linear map.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Upper bound on the spectral radius, used to scale tolerances.
    fn scale(&self) -> f64;
}

impl SymmetricOperator for SparseOperator {
    fn dim(&self) -> usize {
        SparseOperator::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_real(x, y)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        lo.abs().max(hi.abs())
    }
}

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    data: Vec<f64>,
    n: usize,
}

impl DenseSymmetric {
    pub fn new(data: Vec<f64>, n: usize) -> Self {
        assert_eq!(data.len(), n * n);
        Self { data, n }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.data[r * self.n..(r + 1) * self.n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    fn scale(&self) -> f64 {
        (0..self.n)
            .map(|r| self.data[r * self.n..(r + 1) * self.n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Real symmetric embedding of a complex Hermitian sparse operator.
struct RealEmbedding<'a>(&'a SparseOperator);

impl SymmetricOperator for RealEmbedding<'_> {
    fn dim(&self) -> usize {
        2 * self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.0.dim();
        let z: Vec<Complex64> = (0..n).map(|k| Complex64::new(x[k], x[n + k])).collect();
        let mut hz = vec![Complex64::new(0.0, 0.0); n];
        self.0.apply_complex(&z, &mut hz);
        for k in 0..n {
            y[k] = hz[k].re;
            y[n + k] = hz[k].im;
        }
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.0.spectral_bounds();
        lo.abs().max(hi.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EigenOptions {
    pub method: EigenMethod,
    pub lanczos: LanczosOptions,
}

impl EigenOptions {
    pub fn with_method(method: EigenMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    fn use_dense(&self, dim: usize, k: usize) -> bool {
        match self.method {
            EigenMethod::Dense => true,
            EigenMethod::Lanczos => false,
            EigenMethod::Auto => dim <= DENSE_AUTO_LIMIT || 4 * k >= dim,
        }
    }
}

/// Lowest eigenvalues (ascending) with orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs<T> {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<T>>,
}

impl<T> Eigenpairs<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_k(dim: usize, k: usize) -> Result<()> {
    if k == 0 || k > dim {
        return Err(SpoError::InvalidArgument(format!(
            "requested {k} eigenpairs of a {dim}-dimensional operator"
        )));
    }
    Ok(())
}

/// `k` lowest eigenpairs of a real symmetric realization.
pub fn lowest_eigenpairs_sparse(
    op: &SparseOperator,
    k: usize,
    opts: &EigenOptions,
) -> Result<Eigenpairs<f64>> {
    if !op.is_real() {
        return Err(SpoError::ComplexOperator);
    }
    let dim = op.dim();
    check_k(dim, k)?;
    if op.is_diagonal() {
        return Ok(diagonal_eigenpairs(op.diagonal(), k));
    }
    let (mut values, mut vectors) = if opts.use_dense(dim, k) {
        dense::symmetric_eigen(&op.to_dense_real(), dim)?
    } else {
        lanczos::lowest(op, k, &opts.lanczos)?
    };
    values.truncate(k);
    vectors.truncate(k);
    Ok(Eigenpairs { values, vectors })
}

/// `k` lowest eigenvalues of a real symmetric realization.
pub fn lowest_eigenvalues_sparse(op: &SparseOperator, k: usize, opts: &EigenOptions) -> Result<Vec<f64>> {
    if !op.is_real() {
        return Err(SpoError::ComplexOperator);
    }
    let dim = op.dim();
    check_k(dim, k)?;
    if op.is_diagonal() {
        return Ok(diagonal_eigenpairs(op.diagonal(), k).values);
    }
    if opts.use_dense(dim, k) {
        let mut v = dense::symmetric_eigenvalues(&op.to_dense_real(), dim)?;
        v.truncate(k);
        Ok(v)
    } else {
        let loose = LanczosOptions {
            rel_tol: opts.lanczos.values_rel_tol.max(opts.lanczos.rel_tol),
            ..opts.lanczos
        };
        Ok(lanczos::lowest(op, k, &loose)?.0)
    }
}

/// `k` lowest eigenpairs of a real Pauli operator.
///
/// Fails with [`SpoError::ComplexOperator`] when the realization has
/// imaginary entries; see [`lowest_eigenpairs_hermitian`].
pub fn lowest_eigenpairs(op: &PauliOperator, k: usize) -> Result<Eigenpairs<f64>> {
    lowest_eigenpairs_sparse(op.realize(), k, &EigenOptions::default())
}

/// `k` lowest eigenpairs of any Hermitian Pauli operator, with complex vectors.
pub fn lowest_eigenpairs_hermitian(
    op: &PauliOperator,
    k: usize,
    opts: &EigenOptions,
) -> Result<Eigenpairs<Complex64>> {
    let m = op.realize();
    let dim = m.dim();
    check_k(dim, k)?;
    if m.is_real() {
        let real = lowest_eigenpairs_sparse(m, k, opts)?;
        return Ok(Eigenpairs {
            values: real.values,
            vectors: real
                .vectors
                .into_iter()
                .map(|v| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
                .collect(),
        });
    }
    let embedding = RealEmbedding(m);
    let (values, vectors) = if opts.use_dense(2 * dim, 2 * k) {
        let mut dense_embedding = vec![0.0; 4 * dim * dim];
        let full = m.to_dense();
        let n2 = 2 * dim;
        for r in 0..dim {
            for c in 0..dim {
                let z = full[r * dim + c];
                dense_embedding[r * n2 + c] = z.re;
                dense_embedding[r * n2 + dim + c] = -z.im;
                dense_embedding[(dim + r) * n2 + c] = z.im;
                dense_embedding[(dim + r) * n2 + dim + c] = z.re;
            }
        }
        dense::symmetric_eigen(&dense_embedding, n2)?
    } else {
        lanczos::lowest(&embedding, 2 * k, &opts.lanczos)?
    };
    // each complex eigenvector appears twice, as z and i z
    let mut out_values = Vec::with_capacity(k);
    let mut out_vectors: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for (value, v) in values.into_iter().zip(vectors) {
        if out_vectors.len() == k {
            break;
        }
        let mut z: Vec<Complex64> = (0..dim).map(|i| Complex64::new(v[i], v[dim + i])).collect();
        for _ in 0..2 {
            for u in &out_vectors {
                let c: Complex64 = u.iter().zip(&z).map(|(a, b)| a.conj() * b).sum();
                for (zi, ui) in z.iter_mut().zip(u) {
                    *zi -= c * ui;
                }
            }
        }
        let nz = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if nz > 0.5 {
            z.iter_mut().for_each(|x| *x /= nz);
            out_values.push(value);
            out_vectors.push(z);
        }
    }
    if out_vectors.len() < k {
        return Err(SpoError::EigenNonConvergence {
            residual: f64::NAN,
            grid_index: None,
        });
    }
    Ok(Eigenpairs {
        values: out_values,
        vectors: out_vectors,
    })
}

fn diagonal_eigenpairs(diag: &[f64], k: usize) -> Eigenpairs<f64> {
    let mut order: Vec<usize> = (0..diag.len()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    order.truncate(k);
    Eigenpairs {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors: order
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; diag.len()];
                e[i] = 1.0;
                e
            })
            .collect(),
    }
}

/// Largest `||H u - lambda u||` over the pairs.
pub fn max_residual(op: &SparseOperator, pairs: &Eigenpairs<f64>) -> f64 {
    let mut hu = vec![0.0; op.dim()];
    pairs
        .values
        .iter()
        .zip(&pairs.vectors)
        .map(|(&l, u)| {
            op.apply_real(u, &mut hu);
            hu.iter().zip(u).map(|(h, x)| (h - l * x).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}
