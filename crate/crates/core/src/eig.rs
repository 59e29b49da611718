//! Smallest eigenpairs of `K u = λ M u`.
//!
//! The sparse path is shift-invert block subspace iteration: each sweep
//! applies `(K − σM)⁻¹ M` to the block, M-orthonormalizes it and performs a
//! Rayleigh–Ritz projection. A whole block (at least `k + 8` vectors) is
//! iterated so a near-double λ₂ ≈ λ₃ is resolved together rather than one
//! member at a time. The dense path reduces to a standard symmetric problem
//! with the Cholesky factor of `M` and serves as the reference.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cholesky::{FactorError, SparseCholesky};
use crate::fem::OperatorPair;
use crate::sparse::CsrMatrix;

/// Seed of the starting block unless overridden.
pub const DEFAULT_SEED: u64 = 20_180_706;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SHIFT: f64 = -1.0;
pub const DEFAULT_MAX_ITER: usize = 400;
/// Largest dimension accepted by [`solve_dense_reference`].
pub const DENSE_CAP: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no convergence after {iterations} iterations (best residuals {residuals:?})")]
    NonConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },
    #[error("factorization of K − σM failed: {0}")]
    Factorization(#[from] FactorError),
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    TooLarge { dim: usize, cap: usize },
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal, on the free DOFs. Each is signed so that its entry of
    /// largest magnitude is positive.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Ku − λMu‖₂ / ‖Mu‖₂`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub shift: f64,
    pub seed: u64,
    pub max_iter: usize,
    /// Block size; `None` picks `max(2k, k + 8)` capped by the dimension.
    pub block: Option<usize>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            shift: DEFAULT_SHIFT,
            seed: DEFAULT_SEED,
            max_iter: DEFAULT_MAX_ITER,
            block: None,
        }
    }
}

pub fn solve_smallest(pair: &OperatorPair, k: usize, tol: f64) -> Result<EigenResult, EigError> {
    solve_smallest_with(pair.stiffness(), pair.mass(), k, tol, &EigenOptions::default())
}

pub fn solve_smallest_with(
    k_mat: &CsrMatrix,
    m_mat: &CsrMatrix,
    k: usize,
    tol: f64,
    opts: &EigenOptions,
) -> Result<EigenResult, EigError> {
    let n = k_mat.dim();
    if m_mat.dim() != n {
        return Err(EigError::InvalidArgument("K and M differ in size".into()));
    }
    if k == 0 || k > n {
        return Err(EigError::InvalidArgument(format!("k = {k} with dimension {n}")));
    }
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(EigError::InvalidArgument(format!("tol = {tol:e} outside [1e-12, 1e-4]")));
    }
    let p = opts.block.unwrap_or((2 * k).max(k + 8)).clamp(k, n);
    let op = k_mat.add_scaled(m_mat, -opts.shift);
    let chol = SparseCholesky::factor(&op)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut x: Vec<Vec<f64>> = (0..p).map(|_| random_vector(n, &mut rng)).collect();
    m_orthonormalize(m_mat, &mut x, &mut rng);
    let mut best = vec![f64::INFINITY; k];
    let mut work = Vec::with_capacity(n);
    let mut mx = vec![0.0; n];
    for it in 1..=opts.max_iter {
        for xj in x.iter_mut() {
            m_mat.mul_vec_into(xj, &mut mx);
            xj.copy_from_slice(&mx);
            chol.solve_in_place(xj, &mut work);
        }
        m_orthonormalize(m_mat, &mut x, &mut rng);

        let kx: Vec<Vec<f64>> = x.iter().map(|v| k_mat.mul_vec(v)).collect();
        let a = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&x[i], &kx[j]) + dot(&x[j], &kx[i])));
        let (theta, q) = sorted_eigen(a);
        x = combine(&x, &q);

        let residuals: Vec<f64> = (0..k).map(|i| residual(k_mat, m_mat, &x[i], theta[i])).collect();
        for (b, r) in best.iter_mut().zip(&residuals) {
            *b = b.min(*r);
        }
        log::trace!("subspace iteration {it}: residuals {residuals:?}");
        if residuals.iter().all(|&r| r <= tol) {
            let mut vectors: Vec<Vec<f64>> = x.into_iter().take(k).collect();
            vectors.iter_mut().for_each(|v| fix_sign(v));
            return Ok(EigenResult {
                eigenvalues: theta[..k].to_vec(),
                eigenvectors: vectors,
                residuals,
                iterations: it,
            });
        }
    }
    Err(EigError::NonConvergence {
        iterations: opts.max_iter,
        residuals: best,
    })
}

/// Dense generalized solve through the Cholesky factor of `M`.
pub fn solve_dense_reference(pair: &OperatorPair, k: usize) -> Result<EigenResult, EigError> {
    solve_dense(pair.stiffness(), pair.mass(), k)
}

pub fn solve_dense(k_mat: &CsrMatrix, m_mat: &CsrMatrix, k: usize) -> Result<EigenResult, EigError> {
    let n = k_mat.dim();
    if n > DENSE_CAP {
        return Err(EigError::TooLarge { dim: n, cap: DENSE_CAP });
    }
    if k == 0 || k > n {
        return Err(EigError::InvalidArgument(format!("k = {k} with dimension {n}")));
    }
    let dense = |a: &CsrMatrix| {
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in a.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    };
    let kd = dense(k_mat);
    let chol = nalgebra::Cholesky::new(dense(m_mat)).ok_or(EigError::Factorization(
        FactorError::NotPositiveDefinite { row: 0, pivot: f64::NAN },
    ))?;
    let l = chol.l();
    let linv_k = l.solve_lower_triangular(&kd).expect("Cholesky factor is nonsingular");
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .expect("Cholesky factor is nonsingular");
    let c = (&c + c.transpose()) * 0.5;
    let (theta, y) = sorted_eigen(c);
    let x = l
        .transpose()
        .solve_upper_triangular(&y.columns(0, k).into_owned())
        .expect("Cholesky factor is nonsingular");
    let mut vectors: Vec<Vec<f64>> = (0..k).map(|j| x.column(j).iter().copied().collect()).collect();
    vectors.iter_mut().for_each(|v| fix_sign(v));
    let residuals = (0..k).map(|i| residual(k_mat, m_mat, &vectors[i], theta[i])).collect();
    Ok(EigenResult {
        eigenvalues: theta[..k].to_vec(),
        eigenvectors: vectors,
        residuals,
        iterations: 0,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

fn residual(k_mat: &CsrMatrix, m_mat: &CsrMatrix, u: &[f64], lambda: f64) -> f64 {
    let ku = k_mat.mul_vec(u);
    let mu = m_mat.mul_vec(u);
    let r: Vec<f64> = ku.iter().zip(&mu).map(|(a, b)| a - lambda * b).collect();
    norm(&r) / norm(&mu)
}

/// Eigenvalues ascending with matching eigenvector columns.
fn sorted_eigen(a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn combine(x: &[Vec<f64>], q: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = x[0].len();
    (0..q.ncols())
        .map(|c| {
            let mut v = vec![0.0; n];
            for (r, xr) in x.iter().enumerate() {
                let w = q[(r, c)];
                v.iter_mut().zip(xr).for_each(|(a, b)| *a += w * b);
            }
            v
        })
        .collect()
}

/// Gram–Schmidt in the M inner product, two passes per vector. Vectors that
/// collapse are replaced by fresh random ones.
fn m_orthonormalize(m_mat: &CsrMatrix, x: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    let n = m_mat.dim();
    let mut mx: Vec<Vec<f64>> = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let mut attempts = 0;
        loop {
            let before = m_mat.quadratic(&x[j]).max(0.0).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let c = dot(&mx[i], &x[j]);
                    let (head, tail) = x.split_at_mut(j);
                    tail[0].iter_mut().zip(&head[i]).for_each(|(a, b)| *a -= c * b);
                }
            }
            let mv = m_mat.mul_vec(&x[j]);
            let after = dot(&mv, &x[j]).max(0.0).sqrt();
            if after > 1e-10 * before && after > 0.0 {
                x[j].iter_mut().for_each(|a| *a /= after);
                mx.push(mv.into_iter().map(|a| a / after).collect());
                break;
            }
            attempts += 1;
            assert!(attempts < 16, "cannot extend an M-orthonormal block of size {}", x.len());
            x[j] = random_vector(n, rng);
        }
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &a in v.iter() {
        if a.abs() > best {
            best = a.abs();
            sign = a.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_spd_pair(n: usize, seed: u64) -> (CsrMatrix, CsrMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gen = |shift: f64| {
            let b: Vec<Vec<f64>> = (0..n).map(|_| random_vector(n, &mut rng)).collect();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let s: f64 = (0..n).map(|l| b[i][l] * b[j][l]).sum();
                            s + if i == j { shift } else { 0.0 }
                        })
                        .collect()
                })
                .collect();
            CsrMatrix::from_dense(&rows)
        };
        let k = gen(0.1);
        let m = gen(1.0);
        (k, m)
    }

    fn m_gram_error(m: &CsrMatrix, vs: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((m.bilinear(a, b) - target).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_case() {
        let k = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let m = CsrMatrix::identity(2);
        let r = solve_smallest_with(&k, &m, 2, 1e-10, &EigenOptions::default()).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((r.eigenvalues[1] - 2.0).abs() < 1e-12);
        let d = solve_dense(&k, &m, 2).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn p1_interval_pair() {
        let k = CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        let m = CsrMatrix::from_dense(&[vec![2.0 / 6.0, 1.0 / 6.0], vec![1.0 / 6.0, 2.0 / 6.0]]);
        // Oracle: (1,1) and (1,−1) are eigenvectors by symmetry, giving the
        // Rayleigh quotients 1/(1/2) and 3/(1/6).
        let d = solve_dense(&k, &m, 2).unwrap();
        assert!((d.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 18.0).abs() < 1e-12);
        let r = solve_smallest_with(&k, &m, 2, 1e-10, &EigenOptions::default()).unwrap();
        assert!((r.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!((r.eigenvalues[1] - 18.0).abs() < 1e-11);
    }

    #[test]
    fn random_pair_matches_dense() {
        let (k, m) = random_spd_pair(50, 7);
        let d = solve_dense(&k, &m, 5).unwrap();
        let r = solve_smallest_with(&k, &m, 5, 1e-10, &EigenOptions::default()).unwrap();
        for i in 0..5 {
            let scale = d.eigenvalues[i].abs().max(1.0);
            assert!((r.eigenvalues[i] - d.eigenvalues[i]).abs() <= 1e-8 * scale);
            assert!(r.residuals[i] <= 1e-10);
        }
        assert!(m_gram_error(&m, &r.eigenvectors) < 1e-8);
        assert!(m_gram_error(&m, &d.eigenvectors) < 1e-8);
    }

    #[test]
    fn shift_invariance() {
        let (k, m) = random_spd_pair(40, 3);
        let a = solve_smallest_with(&k, &m, 4, 1e-11, &EigenOptions::default()).unwrap();
        let opts = EigenOptions {
            shift: -2.0,
            ..EigenOptions::default()
        };
        let b = solve_smallest_with(&k, &m, 4, 1e-11, &opts).unwrap();
        for i in 0..4 {
            assert!((a.eigenvalues[i] - b.eigenvalues[i]).abs() <= 1e-9 * a.eigenvalues[i].max(1.0));
        }
    }

    #[test]
    fn deterministic_and_signed() {
        let (k, m) = random_spd_pair(30, 11);
        let a = solve_smallest_with(&k, &m, 3, 1e-10, &EigenOptions::default()).unwrap();
        let b = solve_smallest_with(&k, &m, 3, 1e-10, &EigenOptions::default()).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
        for v in &a.eigenvectors {
            let big = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn argument_and_convergence_errors() {
        let (k, m) = random_spd_pair(30, 5);
        assert!(matches!(
            solve_smallest_with(&k, &m, 0, 1e-9, &EigenOptions::default()),
            Err(EigError::InvalidArgument(_))
        ));
        assert!(matches!(
            solve_smallest_with(&k, &m, 2, 1e-2, &EigenOptions::default()),
            Err(EigError::InvalidArgument(_))
        ));
        let opts = EigenOptions {
            max_iter: 1,
            block: Some(3),
            ..EigenOptions::default()
        };
        match solve_smallest_with(&k, &m, 3, 1e-12, &opts) {
            Err(EigError::NonConvergence { iterations, residuals }) => {
                assert_eq!(iterations, 1);
                assert_eq!(residuals.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        let indefinite = CsrMatrix::from_dense(&[vec![0.0, 3.0], vec![3.0, 0.0]]);
        assert!(matches!(
            solve_smallest_with(&indefinite, &CsrMatrix::identity(2), 1, 1e-9, &EigenOptions::default()),
            Err(EigError::Factorization(_))
        ));
    }
}
