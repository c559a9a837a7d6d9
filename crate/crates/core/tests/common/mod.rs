#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use mqag_core::config::PipelineConfig;
use mqag_core::corpus::{self, CorpusFormat, SampleRecord};
use mqag_core::kb::{self, KnowledgeStore};
use mqag_core::pipeline::Pipeline;

pub fn mini_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini")
}

pub fn mini_corpus() -> Vec<SampleRecord> {
    corpus::load_corpus(&mini_dir().join("corpus.jsonl"), CorpusFormat::Jsonl).unwrap()
}

/// Ingests the bundled slice into `dir/kb.bin`.
pub fn mini_kb(dir: &Path) -> Arc<KnowledgeStore> {
    let (store, _) = kb::ingest(&mini_dir().join("conceptnet_slice.tsv"), &dir.join("kb.bin")).unwrap();
    Arc::new(store)
}

/// The bundled config with every path redirected into `dir`.
pub fn mini_config(dir: &Path) -> PipelineConfig {
    let text = std::fs::read_to_string(mini_dir().join("config.toml")).unwrap();
    let mut cfg = PipelineConfig::from_toml(&text, &mini_dir()).unwrap();
    cfg.paths.kb_store = dir.join("kb.bin");
    cfg.paths.output_dir = dir.join("out");
    cfg
}

pub fn mini_pipeline(dir: &Path) -> Pipeline {
    let kb = mini_kb(dir);
    Pipeline::offline(mini_config(dir), kb)
}
