//! Non-negative matrix factorization with multiplicative updates.
//!
//! Minimizes `‖M − W·H‖²_F` with the Lee-Seung rules
//! `H ← H ∘ (WᵀM) ⊘ (WᵀW·H)` and `W ← W ∘ (M·Hᵀ) ⊘ (W·H·Hᵀ)`. An entry whose
//! denominator is zero is left unchanged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use super::LatentError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmfConfig {
    pub max_iters: usize,
    /// Stop once the relative objective improvement falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for NmfConfig {
    fn default() -> Self {
        NmfConfig { max_iters: 500, tol: 1e-5, seed: super::svd::DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfModel<S> {
    /// Terms × k.
    pub w: DenseMatrix<S>,
    /// k × persons.
    pub h: DenseMatrix<S>,
    /// Objective before the first update, then after each iteration.
    pub objective: Vec<S>,
}

impl<S: Scalar> NmfModel<S> {
    pub fn rank(&self) -> usize {
        self.w.cols()
    }

    pub fn iterations(&self) -> usize {
        self.objective.len().saturating_sub(1)
    }

    pub fn relative_error(&self, m: &DenseMatrix<S>) -> S {
        let denom = m.frobenius();
        let err = m.sub(&self.w.matmul(&self.h)).frobenius();
        if denom > S::zero() {
            err / denom
        } else {
            err
        }
    }
}

fn objective<S: Scalar>(m: &DenseMatrix<S>, w: &DenseMatrix<S>, h: &DenseMatrix<S>) -> S {
    m.sub(&w.matmul(h)).frobenius_sq()
}

fn multiplicative_step<S: Scalar>(target: &mut DenseMatrix<S>, numer: &DenseMatrix<S>, denom: &DenseMatrix<S>) {
    for i in 0..target.rows() {
        for j in 0..target.cols() {
            let d = denom[(i, j)];
            if d > S::zero() {
                target[(i, j)] = target[(i, j)] * numer[(i, j)] / d;
            }
        }
    }
}

pub fn nmf_decompose<S: Scalar>(m: &DenseMatrix<S>, k: usize, cfg: &NmfConfig) -> Result<NmfModel<S>, LatentError> {
    if k == 0 {
        return Err(LatentError::RankOutOfRange { k, max: m.rows().min(m.cols()) });
    }
    if !m.is_finite() {
        return Err(LatentError::NonFinite);
    }
    if m.min_value().is_some_and(|v| v < S::zero()) {
        return Err(LatentError::Negative);
    }
    let scale = m.mean() / S::of_usize(k);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        S::lit(z.abs()) * scale
    };
    let mut w = DenseMatrix::from_fn(m.rows(), k, &mut draw);
    let mut h = DenseMatrix::from_fn(k, m.cols(), &mut draw);

    let tol = S::lit(cfg.tol);
    let mut history = vec![objective(m, &w, &h)];
    for _ in 0..cfg.max_iters {
        let prev = *history.last().unwrap();
        if prev == S::zero() {
            break;
        }
        let wt_m = w.t_matmul(m);
        let wt_w_h = w.t_matmul(&w).matmul(&h);
        multiplicative_step(&mut h, &wt_m, &wt_w_h);

        let ht = h.transpose();
        let m_ht = m.matmul(&ht);
        let w_h_ht = w.matmul(&h.matmul(&ht));
        multiplicative_step(&mut w, &m_ht, &w_h_ht);

        let cur = objective(m, &w, &h);
        history.push(cur);
        if (prev - cur) / prev < tol {
            break;
        }
    }
    Ok(NmfModel { w, h, objective: history })
}
