//! Optional TOML config file. Command-line flags take precedence over it.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

use expert_core::person::Formula;
use expert_core::{Bm25fParams, TransformWeights};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    /// `csv` or `jsonl`; guessed from the corpus extension when absent.
    pub corpus_format: Option<String>,
    pub wiki_titles: Option<PathBuf>,
    pub kb_dir: Option<PathBuf>,
    pub stop_words: Option<PathBuf>,
    pub tree: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    pub listen: Option<String>,
    pub k: Option<usize>,
    pub limit: Option<usize>,
    pub alpha: Option<f64>,
    pub formula: Option<Formula>,
    pub percentile: Option<f64>,
    pub max_leaves: Option<usize>,
    pub rank: Option<usize>,
    pub seed: Option<u64>,
    pub normalize: Option<bool>,
    pub idle_timeout_secs: Option<u64>,
    pub max_frame_bytes: Option<usize>,
    pub bm25f: Option<Bm25fParams>,
    pub weights: Option<TransformWeights>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
