//! Consistency metrics over model predictions.
//!
//! Per sample: Q2A is main-question correctness; Q2S-x holds when every
//! sub-question of modality x is answered correctly (undefined when the
//! sample has none); Q2AS-x is Q2A and Q2S-x; Q2S holds when all three
//! modalities hold and is defined only when all three are present. Each
//! accuracy divides by the samples where its indicator is defined.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Modality, QuestionType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub pred: u8,
    pub label: u8,
}

impl Answer {
    pub fn correct(self) -> bool {
        self.pred == self.label
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubPrediction {
    pub question_id: String,
    pub modality: Modality,
    pub pred: u8,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub q2a: Answer,
    #[serde(default)]
    pub subs: Vec<SubPrediction>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indicators {
    pub q2a: bool,
    pub q2s_x: [Option<bool>; 3],
    pub q2as_x: [Option<bool>; 3],
    pub q2s: Option<bool>,
}

pub fn indicators(rec: &PredictionRecord) -> Indicators {
    let q2a = rec.q2a.correct();
    let mut q2s_x = [None; 3];
    for s in &rec.subs {
        let slot = &mut q2s_x[s.modality.index()];
        *slot = Some(slot.unwrap_or(true) && s.pred == s.label);
    }
    let q2as_x = q2s_x.map(|c| c.map(|c| c && q2a));
    let q2s = if q2s_x.iter().all(Option::is_some) { Some(q2s_x.iter().all(|c| *c == Some(true))) } else { None };
    Indicators { q2a, q2s_x, q2as_x, q2s }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub correct: usize,
    /// Samples where the indicator is defined.
    pub total: usize,
    /// Samples left out because the indicator is undefined for them.
    pub excluded: usize,
    /// `correct / total`; absent when `total == 0`.
    pub accuracy: Option<f64>,
}

impl Metric {
    fn from_counts(correct: usize, total: usize, samples: usize) -> Self {
        Metric {
            correct,
            total,
            excluded: samples - total,
            accuracy: (total > 0).then(|| correct as f64 / total as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub samples: usize,
    pub q2a: Metric,
    pub q2s: Metric,
    pub q2s_v: Metric,
    pub q2s_t: Metric,
    pub q2s_bk: Metric,
    pub q2as_v: Metric,
    pub q2as_t: Metric,
    pub q2as_bk: Metric,
    pub notes: Vec<String>,
}

pub const AGGREGATION_NOTES: [&str; 2] = [
    "a modality counts as correct only when every sub-question of that modality is correct",
    "samples without sub-questions of a modality are excluded from that modality's denominators",
];

#[derive(Default)]
struct Tally {
    correct: usize,
    total: usize,
}

impl Tally {
    fn add(&mut self, c: Option<bool>) {
        if let Some(c) = c {
            self.total += 1;
            self.correct += usize::from(c);
        }
    }
}

pub fn aggregate(recs: &[PredictionRecord]) -> MetricReport {
    let mut q2a = Tally::default();
    let mut q2s = Tally::default();
    let mut q2s_x: [Tally; 3] = Default::default();
    let mut q2as_x: [Tally; 3] = Default::default();
    for r in recs {
        let ind = indicators(r);
        q2a.add(Some(ind.q2a));
        q2s.add(ind.q2s);
        for m in 0..3 {
            q2s_x[m].add(ind.q2s_x[m]);
            q2as_x[m].add(ind.q2as_x[m]);
        }
    }
    let n = recs.len();
    let metric = |t: &Tally| Metric::from_counts(t.correct, t.total, n);
    MetricReport {
        samples: n,
        q2a: metric(&q2a),
        q2s: metric(&q2s),
        q2s_v: metric(&q2s_x[0]),
        q2s_t: metric(&q2s_x[1]),
        q2s_bk: metric(&q2s_x[2]),
        q2as_v: metric(&q2as_x[0]),
        q2as_t: metric(&q2as_x[1]),
        q2as_bk: metric(&q2as_x[2]),
        notes: AGGREGATION_NOTES.iter().map(|s| s.to_string()).collect(),
    }
}

impl MetricReport {
    pub fn named(&self) -> [(&'static str, &Metric); 8] {
        [
            ("q2a", &self.q2a),
            ("q2s", &self.q2s),
            ("q2s_v", &self.q2s_v),
            ("q2s_t", &self.q2s_t),
            ("q2s_bk", &self.q2s_bk),
            ("q2as_v", &self.q2as_v),
            ("q2as_t", &self.q2as_t),
            ("q2as_bk", &self.q2as_bk),
        ]
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<8} {:>9} {:>8} {:>8}\n", "metric", "accuracy", "correct", "total");
        for (name, m) in self.named() {
            let acc = m.accuracy.map_or_else(|| "-".to_string(), |a| format!("{a:.4}"));
            let _ = writeln!(out, "{name:<8} {acc:>9} {:>8} {:>8}", m.correct, m.total);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictionError {
    #[error("{sample_id}: prediction or label {value} outside 0..=3")]
    OutOfRange { sample_id: String, value: u8 },
    #[error("{sample_id}: unknown question id {question_id}")]
    UnknownQuestion { sample_id: String, question_id: String },
    #[error("{0}: sample not in corpus")]
    UnknownSample(String),
}

/// Range checks, and question ids against the generated set when given.
pub fn validate_predictions(recs: &[PredictionRecord], known_questions: Option<&HashSet<String>>) -> Vec<PredictionError> {
    let mut errors = Vec::new();
    for r in recs {
        let values = [r.q2a.pred, r.q2a.label].into_iter().chain(r.subs.iter().flat_map(|s| [s.pred, s.label]));
        if let Some(v) = values.into_iter().find(|v| *v > 3) {
            errors.push(PredictionError::OutOfRange { sample_id: r.sample_id.clone(), value: v });
        }
        if let Some(known) = known_questions {
            for s in r.subs.iter().filter(|s| !known.contains(&s.question_id)) {
                errors.push(PredictionError::UnknownQuestion {
                    sample_id: r.sample_id.clone(),
                    question_id: s.question_id.clone(),
                });
            }
        }
    }
    errors
}

/// Reports recomputed within each question type; types without samples are absent.
pub fn by_question_type(
    recs: &[PredictionRecord],
    types: &BTreeMap<String, QuestionType>,
) -> Result<BTreeMap<QuestionType, MetricReport>, PredictionError> {
    let mut parts: BTreeMap<QuestionType, Vec<PredictionRecord>> = BTreeMap::new();
    for r in recs {
        let ty = types.get(&r.sample_id).ok_or_else(|| PredictionError::UnknownSample(r.sample_id.clone()))?;
        parts.entry(*ty).or_default().push(r.clone());
    }
    Ok(parts.into_iter().map(|(ty, rs)| (ty, aggregate(&rs))).collect())
}

/// One row per question type: sample count, then accuracy and denominator per metric.
pub fn by_type_csv(table: &BTreeMap<QuestionType, MetricReport>) -> String {
    let mut out = String::from("question_type,samples");
    for (name, _) in aggregate(&[]).named() {
        let _ = write!(out, ",{name},{name}_total");
    }
    out.push('\n');
    for (ty, report) in table {
        let _ = write!(out, "{},{}", ty.as_str(), report.samples);
        for (_, m) in report.named() {
            let acc = m.accuracy.map_or_else(String::new, |a| format!("{a:.6}"));
            let _ = write!(out, ",{acc},{}", m.total);
        }
        out.push('\n');
    }
    out
}
