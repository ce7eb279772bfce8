//! Truncated SVD by randomized subspace iteration.
//!
//! A Gaussian sketch of width `k + OVERSAMPLE` is pushed through
//! `POWER_ITERS` rounds of `A·Aᵀ` with re-orthonormalization, the matrix is
//! projected onto the resulting basis and the small projection is
//! diagonalized with one-sided Jacobi rotations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::{dot, norm, orthonormalize_columns, DenseMatrix};
use super::LatentError;
use crate::scalar::Scalar;

pub const OVERSAMPLE: usize = 8;
pub const POWER_ITERS: usize = 10;
pub const DEFAULT_SEED: u64 = 0x05ee_d15a;

const MAX_SWEEPS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsaModel<S> {
    /// Terms × k, orthonormal columns.
    pub term_latent: DenseMatrix<S>,
    /// Non-increasing, non-negative.
    pub singular: Vec<S>,
    /// k × persons, orthonormal rows.
    pub latent_person: DenseMatrix<S>,
}

impl<S: Scalar> LsaModel<S> {
    pub fn rank(&self) -> usize {
        self.singular.len()
    }

    /// `U · Σ · Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix<S> {
        let mut us = self.term_latent.clone();
        for i in 0..us.rows() {
            for (j, &s) in self.singular.iter().enumerate() {
                us[(i, j)] = us[(i, j)] * s;
            }
        }
        us.matmul(&self.latent_person)
    }
}

/// Thin SVD of a small dense matrix `b` (r × c, r ≤ c): returns left vectors
/// (r × r), singular values (descending), right vectors (c × r).
pub fn jacobi_svd<S: Scalar>(b: &DenseMatrix<S>) -> (DenseMatrix<S>, Vec<S>, DenseMatrix<S>) {
    // Orthogonalize the columns of X = Bᵀ: X·V = W, so B = V·Σ·(W/Σ)ᵀ.
    let mut x = b.transpose();
    let r = x.cols();
    let mut v = DenseMatrix::from_fn(r, r, |i, j| if i == j { S::one() } else { S::zero() });
    let tol = S::epsilon() * S::of_usize(x.rows().max(1));
    let mut cols: Vec<Vec<S>> = (0..r).map(|j| x.column(j)).collect();
    let mut vcols: Vec<Vec<S>> = (0..r).map(|j| v.column(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..r {
            for q in p + 1..r {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == S::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (S::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (S::one() + zeta * zeta).sqrt());
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = c * t;
                for target in [&mut cols, &mut vcols] {
                    let (lo, hi) = target.split_at_mut(q);
                    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (a, bq) = (*xp, *xq);
                        *xp = c * a - s * bq;
                        *xq = s * a + c * bq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..r).collect();
    let sig: Vec<S> = cols.iter().map(|c| norm(c)).collect();
    order.sort_by(|&a, &b| sig[b].partial_cmp(&sig[a]).unwrap_or(std::cmp::Ordering::Equal));

    let singular: Vec<S> = order.iter().map(|&j| sig[j]).collect();
    for (jj, &j) in order.iter().enumerate() {
        v.set_column(jj, &vcols[j]);
    }
    x = DenseMatrix::zeros(x.rows(), r);
    let floor = singular.first().copied().unwrap_or(S::zero()) * S::epsilon() * S::of_usize(r.max(1));
    let mut valid = true;
    for (jj, &j) in order.iter().enumerate() {
        let s = sig[j];
        if s > floor && s > S::zero() {
            let col: Vec<S> = cols[j].iter().map(|&e| e / s).collect();
            x.set_column(jj, &col);
        } else {
            valid = false;
        }
    }
    if !valid {
        orthonormalize_columns(&mut x);
    }
    (v, singular, x)
}

fn gaussian<S: Scalar>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<S> {
    DenseMatrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        S::lit(z)
    })
}

/// Rank-`k` truncated SVD, deterministic for a given seed.
pub fn lsa_decompose<S: Scalar>(m: &DenseMatrix<S>, k: usize, seed: u64) -> Result<LsaModel<S>, LatentError> {
    let full = m.rows().min(m.cols());
    if k == 0 || k > full {
        return Err(LatentError::RankOutOfRange { k, max: full });
    }
    if !m.is_finite() {
        return Err(LatentError::NonFinite);
    }
    let width = (k + OVERSAMPLE).min(full);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = gaussian::<S>(m.cols(), width, &mut rng);

    let mut q = m.matmul(&omega);
    orthonormalize_columns(&mut q);
    for _ in 0..POWER_ITERS {
        let mut z = m.t_matmul(&q);
        orthonormalize_columns(&mut z);
        q = m.matmul(&z);
        orthonormalize_columns(&mut q);
    }

    let b = q.t_matmul(m);
    let (ub, singular, vb) = jacobi_svd(&b);
    let u = q.matmul(&ub);
    Ok(LsaModel {
        term_latent: u.leading_columns(k),
        singular: singular[..k].to_vec(),
        latent_person: vb.leading_columns(k).transpose(),
    })
}
