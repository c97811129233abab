//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use tokenscope_core::corpus::{load_corpus, SourceSample};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Both fixture corpora, smelly first.
pub fn samples() -> Vec<SourceSample> {
    ["corpus/smelly.jsonl", "corpus/clean.jsonl"]
        .iter()
        .flat_map(|f| load_corpus(fixtures().join(f)).expect("fixture corpus"))
        .collect()
}
