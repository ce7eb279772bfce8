//! Expert search over a publication corpus.
//!
//! Researchers are ranked against free-text queries by fielded BM25F keyword
//! matching blended with knowledge-base field-of-study confidences. The crate
//! also aggregates paper scores into per-researcher term scores, factorizes
//! that matrix (LSA/NMF) for latent-space baselines, classifies researchers
//! into a browsable concept tree, serves prefix autocomplete, and exposes it
//! all over a line-delimited JSON TCP protocol.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

pub mod bm25f;
pub mod browse;
pub mod corpus;
pub mod engine;
pub mod ids;
pub mod knowledge;
pub mod latent;
pub mod lexicon;
pub mod person;
pub mod scalar;
pub mod service;
pub mod snapshot;
pub mod suggest;

pub use ids::{FosId, PaperId, ResearcherId};
pub use scalar::Scalar;

pub type Bm25fParams = bm25f::Bm25fParams<f64>;
pub type TransformWeights = person::TransformWeights<f64>;
pub type PersonTermIndex = person::PersonTermIndex<f64>;
pub type DenseMatrix = latent::DenseMatrix<f64>;
pub type LsaModel = latent::LsaModel<f64>;
pub type NmfModel = latent::NmfModel<f64>;
pub type Engine = engine::Engine<f64>;
