#![allow(dead_code)]

use std::path::PathBuf;

use expert_core::corpus::InputFormat;
use expert_core::engine::EngineInputs;
use expert_core::knowledge::KbPaths;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn inputs() -> EngineInputs {
    let dir = fixtures();
    EngineInputs {
        corpus: dir.join("corpus.csv"),
        corpus_format: InputFormat::Csv,
        wiki_titles: Some(dir.join("wiki_titles.txt")),
        kb: KbPaths::in_dir(&dir.join("kb")),
        stop_words: None,
        tree: Some(dir.join("tree.json")),
    }
}
