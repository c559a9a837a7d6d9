//! Coaching pass: probe a model with generated sub-questions and collect the
//! ones it gets wrong into a training pool.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{Modality, QuestionType, SampleRecord};
use crate::qagen::SubQuestion;
use crate::scorers::http::HttpTransport;
use crate::scorers::{ProviderConfig, ProviderError};

pub const POOL_REASON: &str = "coach_fail";

/// Question types whose visual sub-questions are never used for coaching.
pub fn default_exclusions() -> BTreeSet<QuestionType> {
    BTreeSet::from([QuestionType::Mental, QuestionType::Hypothetical])
}

/// What the model sees: no label, no provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientQuery {
    pub question_id: String,
    pub image_id: String,
    pub stem: String,
    pub choices: Vec<String>,
}

impl From<&SubQuestion> for ClientQuery {
    fn from(q: &SubQuestion) -> Self {
        ClientQuery {
            question_id: q.question_id.clone(),
            image_id: q.image_id.clone(),
            stem: q.stem.clone(),
            choices: q.choices.clone(),
        }
    }
}

pub trait ModelClient: Send + Sync {
    /// Index of the chosen answer, 0..=3.
    fn answer(&self, q: &ClientQuery) -> Result<usize, ProviderError>;
}

/// Fixed answers keyed by question id; unknown ids are a transport failure.
#[derive(Debug, Clone, Default)]
pub struct ScriptedClient {
    answers: HashMap<String, usize>,
}

#[derive(Deserialize)]
struct ScriptLine {
    question_id: String,
    choice_index: usize,
}

impl ScriptedClient {
    pub fn new(answers: impl IntoIterator<Item = (String, usize)>) -> Self {
        ScriptedClient { answers: answers.into_iter().collect() }
    }

    /// JSONL lines of `{question_id, choice_index}`.
    pub fn from_jsonl(path: &Path) -> std::io::Result<Self> {
        let mut answers = HashMap::new();
        for (i, line) in BufReader::new(std::fs::File::open(path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let l: ScriptLine = serde_json::from_str(&line).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1))
            })?;
            answers.insert(l.question_id, l.choice_index);
        }
        Ok(ScriptedClient { answers })
    }
}

impl ModelClient for ScriptedClient {
    fn answer(&self, q: &ClientQuery) -> Result<usize, ProviderError> {
        self.answers.get(&q.question_id).copied().ok_or_else(|| ProviderError::Transport {
            provider: "scripted".into(),
            message: format!("no scripted answer for {}", q.question_id),
            retryable: false,
        })
    }
}

/// Posts `{image_id, stem, choices}` and expects `{choice_index}`.
pub struct HttpModelClient(HttpTransport);

impl HttpModelClient {
    pub fn new(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        Ok(HttpModelClient(HttpTransport::new("model", cfg)?))
    }
}

#[derive(Deserialize)]
struct ChoiceResponse {
    choice_index: usize,
}

impl ModelClient for HttpModelClient {
    fn answer(&self, q: &ClientQuery) -> Result<usize, ProviderError> {
        let r: ChoiceResponse =
            self.0.call(json!({ "image_id": q.image_id, "stem": q.stem, "choices": q.choices }))?;
        Ok(r.choice_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    #[serde(flatten)]
    pub question: SubQuestion,
    pub reason: String,
    pub pass_id: String,
}

/// Append-only set of admitted sub-questions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingPool {
    entries: Vec<PoolEntry>,
    ids: HashSet<String>,
}

impl TrainingPool {
    /// Adds `q` unless its id is already present; returns whether it was added.
    pub fn admit(&mut self, q: SubQuestion, pass_id: &str) -> bool {
        if !self.ids.insert(q.question_id.clone()) {
            return false;
        }
        self.entries.push(PoolEntry { question: q, reason: POOL_REASON.into(), pass_id: pass_id.into() });
        true
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn question_ids(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.question.question_id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoachReport {
    pub pass_id: String,
    pub samples: usize,
    pub probed: usize,
    pub admitted: usize,
    pub excluded: usize,
    /// Samples abandoned after a client failure, with the error.
    pub skipped_samples: BTreeMap<String, String>,
}

enum SampleOutcome {
    Done { probed: usize, excluded: usize, failed: Vec<SubQuestion> },
    Skipped(String),
}

fn probe_sample(
    rec: &SampleRecord,
    questions: &[&SubQuestion],
    client: &dyn ModelClient,
    exclusions: &BTreeSet<QuestionType>,
) -> SampleOutcome {
    let (mut probed, mut excluded, mut failed) = (0, 0, Vec::new());
    for q in questions {
        if q.modality == Modality::Vision && exclusions.contains(&rec.question_type) {
            excluded += 1;
            continue;
        }
        probed += 1;
        match client.answer(&ClientQuery::from(*q)) {
            Ok(choice) if choice == q.label_index => {}
            Ok(_) => failed.push((*q).clone()),
            Err(e) => return SampleOutcome::Skipped(e.to_string()),
        }
    }
    SampleOutcome::Done { probed, excluded, failed }
}

/// One coaching pass. Samples are probed concurrently (up to `parallelism`
/// at a time); admissions are applied in corpus order, and within a sample
/// in vision, text, background-knowledge order.
pub fn coach_pass(
    samples: &[SampleRecord],
    questions: &[SubQuestion],
    client: Arc<dyn ModelClient>,
    exclusions: &BTreeSet<QuestionType>,
    pass_id: &str,
    parallelism: usize,
) -> (TrainingPool, CoachReport) {
    let mut by_sample: HashMap<&str, Vec<&SubQuestion>> = HashMap::new();
    for q in questions {
        by_sample.entry(q.sample_id.as_str()).or_default().push(q);
    }
    for qs in by_sample.values_mut() {
        qs.sort_by(|a, b| a.modality.cmp(&b.modality).then_with(|| a.question_id.cmp(&b.question_id)));
    }
    let run = || -> Vec<SampleOutcome> {
        samples
            .par_iter()
            .map(|rec| {
                let qs = by_sample.get(rec.sample_id.as_str()).map(Vec::as_slice).unwrap_or_default();
                probe_sample(rec, qs, client.as_ref(), exclusions)
            })
            .collect()
    };
    let outcomes = match rayon::ThreadPoolBuilder::new().num_threads(parallelism.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };

    let mut pool = TrainingPool::default();
    let mut report = CoachReport { pass_id: pass_id.into(), samples: samples.len(), ..Default::default() };
    for (rec, outcome) in samples.iter().zip(outcomes) {
        match outcome {
            SampleOutcome::Done { probed, excluded, failed } => {
                report.probed += probed;
                report.excluded += excluded;
                for q in failed {
                    if pool.admit(q, pass_id) {
                        report.admitted += 1;
                    }
                }
            }
            SampleOutcome::Skipped(err) => {
                tracing::warn!(sample = %rec.sample_id, error = %err, "coaching skipped sample");
                report.skipped_samples.insert(rec.sample_id.clone(), err);
            }
        }
    }
    (pool, report)
}
