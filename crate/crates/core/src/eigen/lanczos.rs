//! Lanczos iteration with full reorthogonalization and locking.
//!
//! A single Krylov sequence only sees one copy of each degenerate eigenvalue,
//! so converged Ritz vectors are locked and the iteration is restarted in
//! their orthogonal complement until no eigenvalue below the current `k`-th
//! one is left to find.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{tridiagonal_eigen, tridiagonal_eigenvalues, tridiagonal_eigenvector};
use super::SymmetricOperator;
use crate::error::{Result, SpoError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Target residual `||H u - lambda u||` relative to the operator scale.
    pub rel_tol: f64,
    /// Looser target used when only eigenvalues are wanted; their error goes
    /// as the square of the residual.
    pub values_rel_tol: f64,
    /// Residual (relative) still accepted when the Krylov cap is reached.
    pub accept_tol: f64,
    pub max_krylov: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            values_rel_tol: 1e-9,
            accept_tol: 1e-9,
            max_krylov: 400,
            seed: 0x5eed_1a2c,
        }
    }
}

/// Relative residual at which a Ritz value is trusted for screening.
const SCREEN_TOL: f64 = 1e-6;

struct RitzPair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
}

/// `k` lowest eigenpairs, ascending.
pub fn lowest<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &LanczosOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = op.dim();
    assert!(k >= 1 && k <= dim, "need 1 <= k <= dim");
    let scale = op.scale().max(f64::MIN_POSITIVE);
    let mut locked: Vec<RitzPair> = Vec::new();
    let mut restart = 0u64;
    let mut worst_residual: f64 = 0.0;

    loop {
        locked.sort_by(|a, b| a.value.total_cmp(&b.value));
        if locked.len() >= dim {
            break;
        }
        let (want, threshold) = if locked.len() >= k {
            (1, Some(locked[k - 1].value))
        } else {
            (k - locked.len(), None)
        };
        let found = krylov_run(op, &locked, want, threshold, scale, opts, restart)?;
        restart += 1;
        match threshold {
            None => {
                if found.is_empty() {
                    return Err(SpoError::EigenNonConvergence {
                        residual: f64::NAN,
                        grid_index: None,
                    });
                }
                locked.extend(found);
            }
            Some(t) => match found.into_iter().next() {
                // anything left below the k-th value is a missed copy
                Some(p) if p.value < t - opts.accept_tol * scale => locked.push(p),
                _ => break,
            },
        }
        if restart > 4 * k as u64 + 8 {
            return Err(SpoError::EigenNonConvergence {
                residual: locked.iter().map(|p| p.residual).fold(0.0, f64::max),
                grid_index: None,
            });
        }
    }

    locked.sort_by(|a, b| a.value.total_cmp(&b.value));
    locked.truncate(k);
    for p in &locked {
        worst_residual = worst_residual.max(p.residual);
    }
    if worst_residual > opts.accept_tol * scale {
        return Err(SpoError::EigenNonConvergence {
            residual: worst_residual,
            grid_index: None,
        });
    }
    let values = locked.iter().map(|p| p.value).collect();
    let vectors = locked.into_iter().map(|p| p.vector).collect();
    Ok((values, vectors))
}

fn orthogonalize(v: &mut [f64], basis: &[&[f64]]) {
    // classical Gram-Schmidt, repeated once when the first pass cancels
    // most of the vector
    let before = norm(v);
    gram_schmidt_pass(v, basis);
    if norm(v) < std::f64::consts::FRAC_1_SQRT_2 * before {
        gram_schmidt_pass(v, basis);
    }
}

fn gram_schmidt_pass(v: &mut [f64], basis: &[&[f64]]) {
    for q in basis {
        let c: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        if c != 0.0 {
            for (vi, qi) in v.iter_mut().zip(q.iter()) {
                *vi -= c * qi;
            }
        }
    }
}

/// Tridiagonal eigenvectors for the given Ritz values: inverse iteration,
/// or the full solve when close values make the iterates nearly parallel.
fn ritz_coordinates(alpha: &[f64], beta: &[f64], theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(theta.len());
    for &t in theta {
        let mut y = tridiagonal_eigenvector(alpha, beta, t);
        let previous: Vec<&[f64]> = ys.iter().map(|v| v.as_slice()).collect();
        gram_schmidt_pass(&mut y, &previous);
        let ny = norm(&y);
        if ny < 0.9 {
            let (_, full) = tridiagonal_eigen(alpha, beta)?;
            return Ok(full.into_iter().take(theta.len()).collect());
        }
        y.iter_mut().for_each(|v| *v /= ny);
        ys.push(y);
    }
    Ok(ys)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One Lanczos sequence in the complement of `locked`, returning the `want`
/// lowest Ritz pairs once they meet the tolerance (or the space is exhausted).
fn krylov_run<O: SymmetricOperator + ?Sized>(
    op: &O,
    locked: &[RitzPair],
    want: usize,
    threshold: Option<f64>,
    scale: f64,
    opts: &LanczosOptions,
    restart: u64,
) -> Result<Vec<RitzPair>> {
    let dim = op.dim();
    let room = dim - locked.len();
    let cap = opts.max_krylov.min(room).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ restart.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let locked_vecs: Vec<&[f64]> = locked.iter().map(|p| p.vector.as_slice()).collect();

    let mut q: Vec<f64> = Vec::new();
    for _attempt in 0..4 {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, &locked_vecs);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            q = v;
            break;
        }
    }
    if q.is_empty() {
        return Ok(Vec::new());
    }

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let tol = opts.rel_tol * scale;
    let mut next_check = (want + 10).min(cap);

    loop {
        let m = basis.len();
        op.apply(&basis[m - 1], &mut w);
        let a: f64 = basis[m - 1].iter().zip(&w).map(|(x, y)| x * y).sum();
        alpha.push(a);
        // full reorthogonalization against the Krylov basis and the locked set
        let against: Vec<&[f64]> = basis.iter().map(|b| b.as_slice()).chain(locked_vecs.iter().copied()).collect();
        orthogonalize(&mut w, &against);
        let b = norm(&w);
        let exhausted = m >= cap || b <= 1e-13 * scale;

        if m >= next_check || exhausted {
            let theta = tridiagonal_eigenvalues(&alpha, &beta)?;
            let take = want.min(m);
            let est: Vec<f64> = (0..take)
                .map(|j| (b * tridiagonal_eigenvector(&alpha, &beta, theta[j])[m - 1]).abs())
                .collect();
            // a search for missed copies can stop once its lowest Ritz value
            // is reliably above the threshold
            if let Some(t) = threshold {
                if est[0] <= SCREEN_TOL * scale && theta[0] - est[0] > t + opts.accept_tol * scale {
                    return Ok(Vec::new());
                }
            }
            let converged = est.iter().all(|&r| r <= tol);
            if converged || exhausted {
                let y = ritz_coordinates(&alpha, &beta, &theta[..take])?;
                let mut out = Vec::with_capacity(take);
                for j in 0..take {
                    let mut x = vec![0.0; dim];
                    for (coef, qv) in y[j].iter().zip(&basis) {
                        for (xi, qi) in x.iter_mut().zip(qv) {
                            *xi += coef * qi;
                        }
                    }
                    let against: Vec<&[f64]> = locked_vecs
                        .iter()
                        .copied()
                        .chain(out.iter().map(|p: &RitzPair| p.vector.as_slice()))
                        .collect();
                    orthogonalize(&mut x, &against);
                    let nx = norm(&x);
                    if nx < 0.5 {
                        continue;
                    }
                    x.iter_mut().for_each(|v| *v /= nx);
                    let mut hx = vec![0.0; dim];
                    op.apply(&x, &mut hx);
                    let value: f64 = x.iter().zip(&hx).map(|(p, r)| p * r).sum();
                    let residual = hx
                        .iter()
                        .zip(&x)
                        .map(|(h, v)| (h - value * v).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    out.push(RitzPair {
                        value,
                        vector: x,
                        residual,
                    });
                }
                return Ok(out);
            }
            next_check = (m + 10).min(cap);
        }

        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
    }
}

#[cfg(test)]
mod tests {
    use super::super::DenseSymmetric;
    use super::*;

    #[test]
    fn finds_degenerate_copies() {
        // diag(-4, -2, -2, -2, 0, 1) rotated by nothing: Lanczos alone would
        // see -2 once
        let d = [-4.0, -2.0, -2.0, -2.0, 0.0, 1.0];
        let n = d.len();
        let mut a = vec![0.0; n * n];
        for k in 0..n {
            a[k * n + k] = d[k];
        }
        let op = DenseSymmetric::new(a, n);
        let (vals, vecs) = lowest(&op, 4, &LanczosOptions::default()).unwrap();
        assert_eq!(vals.len(), 4);
        for (v, e) in vals.iter().zip([-4.0, -2.0, -2.0, -2.0]) {
            assert!((v - e).abs() < 1e-12, "{vals:?}");
        }
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(x, y)| x * y).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn whole_spectrum_of_small_matrix() {
        let n = 5;
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..=r {
                let v = ((r + 2 * c) as f64).cos();
                a[r * n + c] = v;
                a[c * n + r] = v;
            }
        }
        let (exact, _) = super::super::dense::symmetric_eigen(&a, n).unwrap();
        let op = DenseSymmetric::new(a, n);
        let (vals, _) = lowest(&op, n, &LanczosOptions::default()).unwrap();
        for (x, y) in vals.iter().zip(&exact) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
