//! Provider interfaces for the learned components of the pipeline.
//!
//! Every provider has a deterministic offline baseline (see [`offline`]) and
//! an HTTP adapter (see [`http`]) that posts JSON to an external model
//! server. Which one is used is decided per provider by [`ProviderConfig`];
//! `MQAG_<PROVIDER>_ENDPOINT` environment variables switch a provider to
//! HTTP without touching the config file.

pub mod cache;
pub mod http;
pub mod offline;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::ImageRef;
use crate::kb::{KnowledgeStore, RelationPool};
use crate::svo::{RuleParser, StatementParser};

pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProviderError {
    #[error("{provider}: transport error: {message}")]
    Transport { provider: String, message: String, retryable: bool },
    #[error("{provider}: malformed response: {message}")]
    Protocol { provider: String, message: String },
    #[error("invalid prompt: {0}")]
    InvalidPrompt(String),
    #[error("provider configuration: {0}")]
    Config(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::Transport { retryable: true, .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    #[default]
    Offline,
    Http,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(default)]
    pub kind: ProviderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<PathBuf>,
}

fn default_timeout_ms() -> u64 {
    DEFAULT_TIMEOUT_MS
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig { kind: ProviderKind::Offline, endpoint: None, timeout_ms: DEFAULT_TIMEOUT_MS, cache_path: None }
    }
}

impl ProviderConfig {
    pub fn http(endpoint: impl Into<String>) -> Self {
        ProviderConfig { kind: ProviderKind::Http, endpoint: Some(endpoint.into()), ..Default::default() }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn validate(&self, provider: &str) -> Result<(), ProviderError> {
        match (self.kind, &self.endpoint) {
            (ProviderKind::Http, None) => {
                Err(ProviderError::Config(format!("{provider}: http provider needs an endpoint")))
            }
            (ProviderKind::Offline, Some(_)) => {
                Err(ProviderError::Config(format!("{provider}: endpoint given for an offline provider")))
            }
            _ if self.timeout_ms == 0 => Err(ProviderError::Config(format!("{provider}: timeout must be > 0"))),
            _ => Ok(()),
        }
    }

    /// Applies `MQAG_<NAME>_ENDPOINT` if set, which also selects HTTP.
    pub fn with_env_override(mut self, provider: &str) -> Self {
        let var = format!("MQAG_{}_ENDPOINT", provider.to_uppercase());
        if let Ok(endpoint) = std::env::var(&var) {
            if !endpoint.trim().is_empty() {
                self.kind = ProviderKind::Http;
                self.endpoint = Some(endpoint.trim().to_string());
            }
        }
        self
    }

    fn resolve_paths(mut self, base: &Path) -> Self {
        if let Some(p) = &self.cache_path {
            if p.is_relative() {
                self.cache_path = Some(base.join(p));
            }
        }
        self
    }
}

/// Per-provider settings as they appear in the pipeline config.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvidersConfig {
    #[serde(default)]
    pub embedding: ProviderConfig,
    #[serde(default)]
    pub image_text: ProviderConfig,
    #[serde(default)]
    pub mask: ProviderConfig,
    #[serde(default)]
    pub realizer: ProviderConfig,
    #[serde(default)]
    pub grammar: ProviderConfig,
    #[serde(default)]
    pub parser: ProviderConfig,
}

impl ProvidersConfig {
    pub const NAMES: [&'static str; 6] = ["embedding", "image_text", "mask", "realizer", "grammar", "parser"];

    fn entries(&self) -> [(&'static str, &ProviderConfig); 6] {
        [
            ("embedding", &self.embedding),
            ("image_text", &self.image_text),
            ("mask", &self.mask),
            ("realizer", &self.realizer),
            ("grammar", &self.grammar),
            ("parser", &self.parser),
        ]
    }

    /// Effective configuration after environment overrides and path resolution.
    pub fn resolved(&self, base: &Path) -> BTreeMap<&'static str, ProviderConfig> {
        self.entries()
            .into_iter()
            .map(|(name, c)| (name, c.clone().with_env_override(name).resolve_paths(base)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub values: Vec<f64>,
    pub norm: f64,
}

impl Embedding {
    pub fn new(values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Embedding { values, norm }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// Cosine similarity; 0 when either vector is zero or dimensions differ.
    pub fn cosine(&self, other: &Embedding) -> f64 {
        if self.values.len() != other.values.len() || self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        (dot / (self.norm * other.norm)).clamp(-1.0, 1.0)
    }
}

pub trait SentenceEncoder: Send + Sync {
    fn name(&self) -> &str;
    fn embed(&self, text: &str) -> Result<Embedding, ProviderError>;

    /// Cosine similarity in [-1, 1].
    fn similarity(&self, a: &str, b: &str) -> Result<f64, ProviderError> {
        Ok(self.embed(a)?.cosine(&self.embed(b)?))
    }
}

pub trait ImageTextScorer: Send + Sync {
    fn name(&self) -> &str;
    /// Relevance of `text` to the image, in [0, 1].
    fn score(&self, image: &ImageRef, text: &str) -> Result<f64, ProviderError>;
}

pub const MASK_TOKEN: &str = "[mask]";

pub trait MaskFiller: Send + Sync {
    fn name(&self) -> &str;
    /// Up to `n` concepts for the `[mask]` position of `prompt`.
    fn fill(&self, prompt: &str, n: usize) -> Result<Vec<String>, ProviderError>;
}

pub trait ConceptRealizer: Send + Sync {
    fn name(&self) -> &str;
    /// Up to `n` everyday sentences, each mentioning every concept.
    fn realize(&self, concepts: &[String], n: usize) -> Result<Vec<String>, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarVerdict {
    pub ok: bool,
    pub corrected: String,
}

pub trait GrammarChecker: Send + Sync {
    fn name(&self) -> &str;
    fn check(&self, text: &str) -> Result<GrammarVerdict, ProviderError>;
}

pub(crate) fn check_mask(prompt: &str) -> Result<(), ProviderError> {
    if prompt.to_lowercase().contains(MASK_TOKEN) {
        Ok(())
    } else {
        Err(ProviderError::InvalidPrompt(format!("no {MASK_TOKEN} token in {prompt:?}")))
    }
}

/// The full set of providers one pipeline run uses.
#[derive(Clone)]
pub struct Providers {
    pub encoder: Arc<dyn SentenceEncoder>,
    pub image_text: Arc<dyn ImageTextScorer>,
    pub mask: Arc<dyn MaskFiller>,
    pub realizer: Arc<dyn ConceptRealizer>,
    pub grammar: Arc<dyn GrammarChecker>,
    pub parser: Arc<dyn StatementParser>,
}

impl Providers {
    pub fn offline(kb: Arc<KnowledgeStore>) -> Self {
        Providers {
            encoder: Arc::new(offline::HashedBow),
            image_text: Arc::new(offline::TagJaccard),
            mask: Arc::new(offline::KbMaskFiller::new(kb, RelationPool::distractor())),
            realizer: Arc::new(offline::RuleRealizer),
            grammar: Arc::new(offline::RuleGrammar),
            parser: Arc::new(RuleParser),
        }
    }

    /// Builds providers from config; relative cache paths resolve against `base`.
    pub fn from_config(cfg: &ProvidersConfig, kb: Arc<KnowledgeStore>, base: &Path) -> Result<Self, ProviderError> {
        let resolved = cfg.resolved(base);
        for (name, c) in &resolved {
            c.validate(name)?;
        }
        let mut p = Providers::offline(kb);
        let transport = |name: &str| -> Result<Option<http::HttpTransport>, ProviderError> {
            let c = &resolved[name];
            match c.kind {
                ProviderKind::Offline => Ok(None),
                ProviderKind::Http => http::HttpTransport::new(name, c).map(Some),
            }
        };
        if let Some(t) = transport("embedding")? {
            p.encoder = Arc::new(http::HttpEncoder(t));
        }
        if let Some(t) = transport("image_text")? {
            p.image_text = Arc::new(http::HttpImageText(t));
        }
        if let Some(t) = transport("mask")? {
            p.mask = Arc::new(http::HttpMaskFiller(t));
        }
        if let Some(t) = transport("realizer")? {
            p.realizer = Arc::new(http::HttpRealizer(t));
        }
        if let Some(t) = transport("grammar")? {
            p.grammar = Arc::new(http::HttpGrammar(t));
        }
        if let Some(t) = transport("parser")? {
            p.parser = Arc::new(http::HttpParser(t));
        }
        Ok(p)
    }

    /// Provider names in a stable order, recorded in the run manifest.
    pub fn describe(&self) -> BTreeMap<&'static str, String> {
        BTreeMap::from([
            ("embedding", self.encoder.name().to_string()),
            ("image_text", self.image_text.name().to_string()),
            ("mask", self.mask.name().to_string()),
            ("realizer", self.realizer.name().to_string()),
            ("grammar", self.grammar.name().to_string()),
            ("parser", self.parser.name().to_string()),
        ])
    }
}

impl std::fmt::Debug for Providers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.describe()).finish()
    }
}
