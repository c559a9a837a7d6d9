//! Pipeline configuration file (TOML).
//!
//! ```toml
//! seed = 7
//! parallelism = 4
//!
//! [paths]
//! corpus = "corpus.jsonl"
//! captions = "captions.jsonl"   # optional
//! kb_store = "kb.bin"
//! output_dir = "out"
//!
//! [providers.embedding]         # one table per provider, all optional
//! kind = "offline"
//!
//! [merge]
//! node_threshold = 0.8
//!
//! [filter]
//! similarity_cutoff = 0.7
//!
//! [generation]
//! keywords = 3
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::DEFAULT_KEYWORDS;
use crate::distract::{DEFAULT_BUDGET, MIN_BUDGET};
use crate::filter::FilterConfig;
use crate::graph::MergeConfig;
use crate::scorers::ProvidersConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub corpus: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub captions: Option<PathBuf>,
    pub kb_store: PathBuf,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    /// Query keywords extracted per sample.
    #[serde(default = "default_keywords")]
    pub keywords: usize,
    /// Knowledge-store neighbors retrieved per keyword.
    #[serde(default = "default_bk_neighbors")]
    pub bk_neighbors: usize,
    /// Distractor candidates generated before filtering.
    #[serde(default = "default_budget")]
    pub distractor_budget: usize,
    /// Distractors per verification task (`--emit-tasks`).
    #[serde(default = "default_task_distractors")]
    pub task_distractors: usize,
    /// Lower-ranked triplets of the same modality tried when the top pick
    /// yields no question.
    #[serde(default = "default_fallback_depth")]
    pub fallback_depth: usize,
}

fn default_keywords() -> usize {
    DEFAULT_KEYWORDS
}
fn default_bk_neighbors() -> usize {
    4
}
fn default_budget() -> usize {
    DEFAULT_BUDGET
}
fn default_task_distractors() -> usize {
    6
}
fn default_fallback_depth() -> usize {
    2
}
fn default_parallelism() -> usize {
    4
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            keywords: default_keywords(),
            bk_neighbors: default_bk_neighbors(),
            distractor_budget: default_budget(),
            task_distractors: default_task_distractors(),
            fallback_depth: default_fallback_depth(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    pub paths: PathsConfig,
    #[serde(default)]
    pub providers: ProvidersConfig,
    #[serde(default)]
    pub merge: MergeConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub generation: GenerationConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_toml(s: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: PipelineConfig = toml::from_str(s)
            .map_err(|e| ConfigError::Parse { path: base_dir.to_path_buf(), message: e.to_string() })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let s = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&s, &base).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.to_path_buf(), message },
            other => other,
        })
    }

    fn check(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.parallelism == 0 {
            return invalid("parallelism must be at least 1".into());
        }
        if !self.merge.node_threshold.is_finite() {
            return invalid("merge.node_threshold must be finite".into());
        }
        self.filter.validate().map_err(ConfigError::Invalid)?;
        let g = &self.generation;
        if g.keywords == 0 {
            return invalid("generation.keywords must be at least 1".into());
        }
        if g.distractor_budget < MIN_BUDGET {
            return invalid(format!("generation.distractor_budget must be at least {MIN_BUDGET}"));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.resolve(&self.paths.corpus)
    }

    pub fn captions_path(&self) -> Option<PathBuf> {
        self.paths.captions.as_deref().map(|p| self.resolve(p))
    }

    pub fn kb_path(&self) -> PathBuf {
        self.resolve(&self.paths.kb_store)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.paths.output_dir)
    }

    /// Input files that must exist before a run starts.
    pub fn check_inputs(&self) -> Result<(), ConfigError> {
        let mut inputs = vec![("paths.corpus", self.corpus_path()), ("paths.kb_store", self.kb_path())];
        if let Some(c) = self.captions_path() {
            inputs.push(("paths.captions", c));
        }
        for (name, p) in inputs {
            if !p.is_file() {
                return Err(ConfigError::Invalid(format!("{name}: {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 over the parsed configuration; formatting and comments in
    /// the file do not affect it, any field value does.
    pub fn config_hash(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        Sha256::digest(v.to_string().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = "seed = 1\n[paths]\ncorpus = \"c.jsonl\"\nkb_store = \"kb.bin\"\noutput_dir = \"out\"\n";

    #[test]
    fn defaults_fill_in() {
        let c = PipelineConfig::from_toml(MIN, Path::new("/base")).unwrap();
        assert_eq!(c.merge, MergeConfig::default());
        assert_eq!(c.generation.distractor_budget, 8);
        assert_eq!(c.corpus_path(), PathBuf::from("/base/c.jsonl"));
    }

    #[test]
    fn hash_tracks_fields_not_formatting() {
        let a = PipelineConfig::from_toml(MIN, Path::new("/b")).unwrap();
        let b = PipelineConfig::from_toml(&format!("# comment\n{MIN}\n\n"), Path::new("/b")).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        let c = PipelineConfig::from_toml(&MIN.replace("seed = 1", "seed = 2"), Path::new("/b")).unwrap();
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::from_toml(&format!("{MIN}[filter]\nsimilarity_cutoff = 1.5\n"), Path::new("/")).is_err());
        assert!(PipelineConfig::from_toml(&format!("{MIN}[generation]\ndistractor_budget = 3\n"), Path::new("/")).is_err());
        assert!(PipelineConfig::from_toml(&format!("{MIN}bogus = 1\n"), Path::new("/")).is_err());
    }
}
