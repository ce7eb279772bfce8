//! Latent-space baselines over the person-term matrix: LSA and NMF
//! factorizations, query folding, cosine ranking and libfm export.

pub mod libfm;
pub mod matrix;
pub mod nmf;
pub mod svd;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use libfm::{export_libfm, format_score, libfm_line, parse_libfm_line, write_libfm, LibfmIds};
pub use matrix::{cosine, DenseMatrix};
pub use nmf::{nmf_decompose, NmfConfig, NmfModel};
pub use svd::{lsa_decompose, LsaModel};

use crate::ids::ResearcherId;
use crate::person::PersonTermIndex;
use crate::scalar::{cmp_desc, Scalar};
use crate::snapshot::{Snapshot, SnapshotError, SnapshotReader, SnapshotWriter, Tag};

pub const DEFAULT_RANK: usize = 64;

#[derive(Debug, Error)]
pub enum LatentError {
    #[error("rank {k} outside 1..={max}")]
    RankOutOfRange { k: usize, max: usize },
    #[error("matrix contains non-finite values")]
    NonFinite,
    #[error("matrix contains negative values")]
    Negative,
    #[error("no query term is in the model vocabulary")]
    EmptyQuery,
    #[error("query vector is zero")]
    ZeroQuery,
    #[error("duplicate libfm id {0}")]
    IdCollision(u64),
    #[error("missing libfm id for {0}")]
    MissingId(String),
    #[error("malformed libfm line: {0:?}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense terms × researchers matrix with its row and column labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonTermMatrix<S> {
    /// Sorted.
    pub terms: Vec<String>,
    /// Sorted.
    pub researchers: Vec<ResearcherId>,
    pub matrix: DenseMatrix<S>,
}

impl<S: Scalar> PersonTermMatrix<S> {
    /// Densify the index; with `normalize` every researcher column gets unit L2 norm.
    pub fn from_index(index: &PersonTermIndex<S>, normalize: bool) -> Self {
        let terms: Vec<String> = index.terms().map(str::to_owned).collect();
        let researchers = index.researchers();
        let col: BTreeMap<&ResearcherId, usize> = researchers.iter().enumerate().map(|(j, r)| (r, j)).collect();
        let mut matrix = DenseMatrix::zeros(terms.len(), researchers.len());
        for (i, (_, postings)) in index.iter().enumerate() {
            for (r, s) in postings {
                matrix[(i, col[r])] = *s;
            }
        }
        if normalize {
            matrix = matrix.normalize_columns();
        }
        PersonTermMatrix { terms, researchers, matrix }
    }

    pub fn term_row(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    /// `k` clamped into `1..=min(rows, cols)`.
    pub fn clamp_rank(&self, k: usize) -> usize {
        k.clamp(1, self.matrix.rows().min(self.matrix.cols()).max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LatentModel<S> {
    Lsa(LsaModel<S>),
    Nmf(NmfModel<S>),
}

impl<S: Scalar> LatentModel<S> {
    pub fn rank(&self) -> usize {
        match self {
            LatentModel::Lsa(m) => m.rank(),
            LatentModel::Nmf(m) => m.rank(),
        }
    }

    /// Latent coordinates of every researcher, one row each.
    fn person_vectors(&self) -> DenseMatrix<S> {
        match self {
            LatentModel::Lsa(m) => m.latent_person.transpose(),
            LatentModel::Nmf(m) => m.h.transpose(),
        }
    }

    /// Map a term-space vector into latent space.
    pub fn fold_in(&self, q: &[S]) -> Vec<S> {
        match self {
            LatentModel::Lsa(m) => {
                let proj = m.term_latent.t_mat_vec(q);
                proj.iter()
                    .zip(&m.singular)
                    .map(|(&p, &s)| if s > S::zero() { p / s } else { S::zero() })
                    .collect()
            }
            LatentModel::Nmf(m) => {
                let gram = m.w.t_matmul(&m.w);
                let rhs = m.w.t_mat_vec(q);
                let x = matrix::solve(&gram, &rhs).unwrap_or_else(|| ridge_solve(&gram, &rhs));
                x.into_iter().map(|v| v.max(S::zero())).collect()
            }
        }
    }
}

/// Least squares on a rank-deficient Gram matrix via a small diagonal shift.
fn ridge_solve<S: Scalar>(gram: &DenseMatrix<S>, rhs: &[S]) -> Vec<S> {
    let n = gram.rows();
    let trace = (0..n).fold(S::zero(), |a, i| a + gram[(i, i)]);
    let mut lambda = (trace / S::of_usize(n.max(1))).max(S::one()) * S::lit(1e-10);
    loop {
        let shifted = DenseMatrix::from_fn(n, n, |i, j| if i == j { gram[(i, j)] + lambda } else { gram[(i, j)] });
        if let Some(x) = matrix::solve(&shifted, rhs) {
            return x;
        }
        lambda = lambda * S::lit(100.0);
    }
}

/// A fitted model together with the vocabulary and researcher labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentIndex<S> {
    terms: Vec<String>,
    researchers: Vec<ResearcherId>,
    model: LatentModel<S>,
    persons: DenseMatrix<S>,
}

impl<S: Scalar> LatentIndex<S> {
    pub fn new(terms: Vec<String>, researchers: Vec<ResearcherId>, model: LatentModel<S>) -> Self {
        let persons = model.person_vectors();
        assert_eq!(persons.rows(), researchers.len(), "model and researcher labels disagree");
        LatentIndex { terms, researchers, model, persons }
    }

    pub fn lsa(m: &PersonTermMatrix<S>, k: usize, seed: u64) -> Result<Self, LatentError> {
        let model = lsa_decompose(&m.matrix, k, seed)?;
        Ok(Self::new(m.terms.clone(), m.researchers.clone(), LatentModel::Lsa(model)))
    }

    pub fn nmf(m: &PersonTermMatrix<S>, k: usize, cfg: &NmfConfig) -> Result<Self, LatentError> {
        let model = nmf_decompose(&m.matrix, k, cfg)?;
        Ok(Self::new(m.terms.clone(), m.researchers.clone(), LatentModel::Nmf(model)))
    }

    pub fn model(&self) -> &LatentModel<S> {
        &self.model
    }

    pub fn researchers(&self) -> &[ResearcherId] {
        &self.researchers
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Latent coordinates of researcher `j` (column order of the matrix).
    pub fn person_vector(&self, j: usize) -> &[S] {
        self.persons.row(j)
    }

    fn term_row(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    /// Binary indicator over the distinct known terms, folded into latent space.
    pub fn project_query<T: AsRef<str>>(&self, terms: &[T]) -> Result<Vec<S>, LatentError> {
        let weights: BTreeMap<String, S> = terms.iter().map(|t| (t.as_ref().to_owned(), S::one())).collect();
        self.project_weighted(&weights)
    }

    /// Weighted term vector folded into latent space; unknown terms are ignored.
    pub fn project_weighted(&self, weights: &BTreeMap<String, S>) -> Result<Vec<S>, LatentError> {
        let mut q = vec![S::zero(); self.terms.len()];
        let mut known = false;
        for (t, &w) in weights {
            if let Some(i) = self.term_row(t) {
                q[i] = w;
                known = true;
            }
        }
        if !known {
            return Err(LatentError::EmptyQuery);
        }
        Ok(self.model.fold_in(&q))
    }

    /// Researchers by descending cosine to `q`, ties by id.
    pub fn rank_by_cosine(&self, q: &[S]) -> Result<Vec<(ResearcherId, S)>, LatentError> {
        if !q.iter().any(|&v| v != S::zero()) {
            return Err(LatentError::ZeroQuery);
        }
        let mut out: Vec<(ResearcherId, S)> = self
            .researchers
            .iter()
            .enumerate()
            .map(|(j, r)| (r.clone(), cosine(q, self.persons.row(j))))
            .collect();
        out.sort_by(|a, b| cmp_desc(a.1, b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    pub fn search<T: AsRef<str>>(&self, terms: &[T], k: usize) -> Result<Vec<(ResearcherId, S)>, LatentError> {
        let q = self.project_query(terms)?;
        let mut ranked = self.rank_by_cosine(&q)?;
        ranked.truncate(k);
        Ok(ranked)
    }
}

impl<S: Scalar> Snapshot for LatentIndex<S> {
    const KIND: Tag = *b"LATN";

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError> {
        SnapshotWriter::new(Self::KIND)
            .block(*b"TERM", &self.terms)?
            .block(*b"RSCH", &self.researchers)?
            .block(*b"MODL", &self.model)
    }

    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError> {
        let terms = r.block(*b"TERM")?;
        let researchers: Vec<ResearcherId> = r.block(*b"RSCH")?;
        let model: LatentModel<S> = r.block(*b"MODL")?;
        if model.person_vectors().rows() != researchers.len() {
            return Err(SnapshotError::Invalid("model and researcher labels disagree".into()));
        }
        Ok(Self::new(terms, researchers, model))
    }
}
