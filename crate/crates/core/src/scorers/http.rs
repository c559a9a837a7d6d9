//! HTTP adapters. Each provider POSTs a small JSON body to its endpoint and
//! reads a JSON response; see the README for the exact shapes.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::corpus::{ImageRef, Statement};
use crate::lexicon;
use crate::svo::{StatementParser, Triplet};
use crate::text;

use super::cache::{cache_key, ResponseCache};
use super::{
    check_mask, ConceptRealizer, Embedding, GrammarChecker, GrammarVerdict, ImageTextScorer, MaskFiller,
    ProviderConfig, ProviderError, SentenceEncoder,
};

pub const MAX_RETRIES: u32 = 2;
pub const BACKOFF_BASE: Duration = Duration::from_millis(50);

/// Shared request path: retry policy, response cache, error mapping.
pub struct HttpTransport {
    provider: String,
    endpoint: String,
    agent: ureq::Agent,
    cache: Option<Arc<ResponseCache>>,
    backoff: Duration,
    network_calls: AtomicU64,
}

impl HttpTransport {
    pub fn new(provider: &str, cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        cfg.validate(provider)?;
        let endpoint = cfg
            .endpoint
            .clone()
            .ok_or_else(|| ProviderError::Config(format!("{provider}: no endpoint")))?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        let cache = cfg.cache_path.as_deref().map(ResponseCache::open).transpose()?.map(Arc::new);
        Ok(HttpTransport {
            provider: provider.to_string(),
            endpoint,
            agent,
            cache,
            backoff: BACKOFF_BASE,
            network_calls: AtomicU64::new(0),
        })
    }

    /// Overrides the first backoff delay (doubles per retry).
    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }

    /// Requests that actually went over the wire, retries included.
    pub fn network_calls(&self) -> u64 {
        self.network_calls.load(Ordering::Relaxed)
    }

    fn transport_err(&self, message: String, retryable: bool) -> ProviderError {
        ProviderError::Transport { provider: self.provider.clone(), message, retryable }
    }

    fn post_once(&self, request: &Value) -> Result<Value, ProviderError> {
        self.network_calls.fetch_add(1, Ordering::Relaxed);
        match self.agent.post(&self.endpoint).send_json(request) {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                if status == 429 || status >= 500 {
                    return Err(self.transport_err(format!("status {status}"), true));
                }
                if !(200..300).contains(&status) {
                    return Err(self.transport_err(format!("status {status}"), false));
                }
                resp.body_mut().read_json::<Value>().map_err(|e| ProviderError::Protocol {
                    provider: self.provider.clone(),
                    message: e.to_string(),
                })
            }
            Err(e) => {
                let retryable = matches!(
                    e,
                    ureq::Error::Timeout(_) | ureq::Error::Io(_) | ureq::Error::ConnectionFailed
                );
                Err(self.transport_err(e.to_string(), retryable))
            }
        }
    }

    /// POSTs `request`, retrying transient failures, and decodes the reply.
    /// Successful replies are cached when a cache path is configured.
    pub fn call<T: DeserializeOwned>(&self, request: Value) -> Result<T, ProviderError> {
        let key = cache_key(&self.provider, &request);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            return self.decode(hit);
        }
        let mut attempt = 0;
        let value = loop {
            match self.post_once(&request) {
                Ok(v) => break v,
                Err(e) if e.is_retryable() && attempt < MAX_RETRIES => {
                    tracing::debug!(provider = %self.provider, attempt, error = %e, "retrying");
                    std::thread::sleep(self.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        let decoded = self.decode(value.clone())?;
        if let Some(cache) = &self.cache {
            cache.put(&key, &self.provider, &value)?;
        }
        Ok(decoded)
    }

    fn decode<T: DeserializeOwned>(&self, value: Value) -> Result<T, ProviderError> {
        serde_json::from_value(value)
            .map_err(|e| ProviderError::Protocol { provider: self.provider.clone(), message: e.to_string() })
    }

    fn protocol(&self, message: impl Into<String>) -> ProviderError {
        ProviderError::Protocol { provider: self.provider.clone(), message: message.into() }
    }
}

pub struct HttpEncoder(pub HttpTransport);

#[derive(Deserialize)]
struct EmbeddingResponse {
    embedding: Vec<f64>,
}

impl SentenceEncoder for HttpEncoder {
    fn name(&self) -> &str {
        "http:embedding"
    }

    fn embed(&self, text: &str) -> Result<Embedding, ProviderError> {
        let r: EmbeddingResponse = self.0.call(json!({ "text": text }))?;
        if r.embedding.is_empty() || r.embedding.iter().any(|v| !v.is_finite()) {
            return Err(self.0.protocol("embedding must be a non-empty finite vector"));
        }
        Ok(Embedding::new(r.embedding))
    }
}

pub struct HttpImageText(pub HttpTransport);

#[derive(Deserialize)]
struct ScoreResponse {
    score: f64,
}

impl ImageTextScorer for HttpImageText {
    fn name(&self) -> &str {
        "http:image_text"
    }

    fn score(&self, image: &ImageRef, text: &str) -> Result<f64, ProviderError> {
        let r: ScoreResponse = self.0.call(json!({ "image_id": image.image_id, "text": text }))?;
        if !(0.0..=1.0).contains(&r.score) {
            return Err(self.0.protocol(format!("score {} outside [0, 1]", r.score)));
        }
        Ok(r.score)
    }
}

pub struct HttpMaskFiller(pub HttpTransport);

#[derive(Deserialize)]
struct FillResponse {
    fills: Vec<String>,
}

impl MaskFiller for HttpMaskFiller {
    fn name(&self) -> &str {
        "http:mask"
    }

    fn fill(&self, prompt: &str, n: usize) -> Result<Vec<String>, ProviderError> {
        check_mask(prompt)?;
        let r: FillResponse = self.0.call(json!({ "prompt": prompt, "n": n }))?;
        Ok(r.fills.into_iter().map(|f| f.trim().to_string()).filter(|f| !f.is_empty()).take(n).collect())
    }
}

pub struct HttpRealizer(pub HttpTransport);

#[derive(Deserialize)]
struct SentencesResponse {
    sentences: Vec<String>,
}

impl ConceptRealizer for HttpRealizer {
    fn name(&self) -> &str {
        "http:realizer"
    }

    /// Sentences that leave out any concept are dropped.
    fn realize(&self, concepts: &[String], n: usize) -> Result<Vec<String>, ProviderError> {
        let r: SentencesResponse = self.0.call(json!({ "concepts": concepts, "n": n }))?;
        let mut out = Vec::new();
        for s in r.sentences {
            let missing = concepts.iter().find(|c| !text::contains_phrase(&s, &text::display_concept(c)));
            match missing {
                Some(c) => tracing::warn!(sentence = %s, concept = %c, "realizer output dropped: concept missing"),
                None => out.push(s),
            }
        }
        out.truncate(n);
        Ok(out)
    }
}

pub struct HttpGrammar(pub HttpTransport);

impl GrammarChecker for HttpGrammar {
    fn name(&self) -> &str {
        "http:grammar"
    }

    fn check(&self, text: &str) -> Result<GrammarVerdict, ProviderError> {
        self.0.call(json!({ "text": text }))
    }
}

pub struct HttpParser(pub HttpTransport);

#[derive(Deserialize)]
struct WireTriplet {
    s: String,
    p: String,
    o: String,
}

#[derive(Deserialize)]
struct ParseResponse {
    triplets: Vec<WireTriplet>,
}

fn clean_part(s: &str) -> String {
    text::words(s).into_iter().filter(|w| !lexicon::is_determiner(w)).collect::<Vec<_>>().join(" ")
}

impl StatementParser for HttpParser {
    fn name(&self) -> &str {
        "http:parser"
    }

    fn parse(&self, statement: &Statement) -> Result<Vec<Triplet>, ProviderError> {
        let r: ParseResponse = self.0.call(json!({ "text": statement.text }))?;
        let mut out = Vec::new();
        for w in r.triplets {
            let t = Triplet::new(
                clean_part(&w.s),
                clean_part(&w.p),
                clean_part(&w.o),
                statement.modality,
                statement.source_sample.clone(),
            );
            if t.is_valid() && t.subject != t.object && !out.contains(&t) {
                out.push(t);
            }
        }
        Ok(out)
    }
}
