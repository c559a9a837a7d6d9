//! Human verification of generated questions.
//!
//! A verification task shows seven content choices (one generated-correct,
//! six generated distractors) plus two sentinels, "None of the above" and
//! "I do not know how to answer". Five annotators each select every choice
//! they consider correct; [`aggregate_task`] turns their selections into a
//! final four-choice question or a rejection.

pub mod store;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Modality;
use crate::filter::shuffle_choices;
use crate::qagen::{SubQuestion, TripletRef};
use crate::svo::Slot;
use crate::text;

pub type ChoiceId = u8;

pub const CONTENT_CHOICES: usize = 7;
pub const NONE_OF_THE_ABOVE: ChoiceId = 7;
pub const CANNOT_ANSWER: ChoiceId = 8;
pub const ANNOTATORS_PER_TASK: usize = 5;
pub const MIN_VOTES: usize = 3;
pub const FINAL_DISTRACTORS: usize = 3;

pub const NONE_OF_THE_ABOVE_TEXT: &str = "None of the above";
pub const CANNOT_ANSWER_TEXT: &str = "I do not know how to answer";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationTask {
    pub task_id: String,
    pub question_id: String,
    pub sample_id: String,
    pub image_id: String,
    pub modality: Modality,
    pub asked_slot: Slot,
    pub source_triplet: TripletRef,
    pub stem: String,
    pub choices: Vec<String>,
    /// Index of the generated-correct choice; never sent to annotators.
    pub generated_label: ChoiceId,
}

impl VerificationTask {
    pub fn validate(&self) -> Result<(), String> {
        if self.task_id.is_empty()
            || !self.task_id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(format!("task id {:?} must be non-empty [A-Za-z0-9._-]", self.task_id));
        }
        if self.choices.len() != CONTENT_CHOICES {
            return Err(format!("{}: {} choices, expected {CONTENT_CHOICES}", self.task_id, self.choices.len()));
        }
        if usize::from(self.generated_label) >= CONTENT_CHOICES {
            return Err(format!("{}: generated label {} out of range", self.task_id, self.generated_label));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub annotator_id: String,
    #[serde(default)]
    pub selected: BTreeSet<ChoiceId>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub corrected_texts: BTreeMap<ChoiceId, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected_stem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_answer: Option<String>,
    /// False when the annotator could not make sense of the question and skipped it.
    #[serde(default = "default_true")]
    pub question_ok: bool,
}

fn default_true() -> bool {
    true
}

impl Annotation {
    pub fn is_skip(&self) -> bool {
        !self.question_ok
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.annotator_id.trim().is_empty() {
            return Err("annotator_id must be non-empty".into());
        }
        if let Some(id) = self.selected.iter().find(|&&id| id > CANNOT_ANSWER) {
            return Err(format!("choice id {id} out of range"));
        }
        if let Some(id) = self.corrected_texts.keys().find(|&&id| usize::from(id) >= CONTENT_CHOICES) {
            return Err(format!("correction for non-content choice {id}"));
        }
        if self.is_skip() {
            return Ok(());
        }
        if self.selected.is_empty() {
            return Err("at least one choice must be selected".into());
        }
        let custom = self.custom_answer.as_deref().is_some_and(|s| !s.trim().is_empty());
        match (self.selected.contains(&NONE_OF_THE_ABOVE), custom) {
            (true, false) => Err("\"None of the above\" requires a custom answer".into()),
            (false, true) => Err("a custom answer is only allowed with \"None of the above\"".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationBatch {
    pub task_id: String,
    pub annotations: Vec<Annotation>,
}

impl AnnotationBatch {
    /// Annotations that count toward the vote (skips excluded).
    pub fn votes(&self) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter().filter(|a| !a.is_skip())
    }

    /// Selection count per choice id (0..=8).
    pub fn counts(&self) -> [usize; 9] {
        let mut counts = [0; 9];
        for a in self.votes() {
            for &id in &a.selected {
                counts[usize::from(id)] += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// No choice was selected by at least three annotators.
    NoMajority,
    /// Two or more choices tie for the most selections.
    Ambiguous,
    NoneOfTheAbove,
    CannotAnswer,
    /// Fewer than three choices were left unselected by everyone.
    TooFewDistractors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub task_id: String,
    pub reason: RejectReason,
    /// Custom answers written with "None of the above", for manual review.
    pub custom_answers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalizedQuestion {
    pub question: SubQuestion,
    pub winner: ChoiceId,
    pub winner_votes: usize,
    pub label_changed: bool,
    pub distractor_ids: Vec<ChoiceId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AggregateOutcome {
    Finalized(FinalizedQuestion),
    Rejected(Rejection),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggregateError {
    #[error("{task_id}: {found} counted annotations, {ANNOTATORS_PER_TASK} required")]
    AnnotatorCount { task_id: String, found: usize },
    #[error("batch for {batch} does not belong to task {task}")]
    TaskMismatch { batch: String, task: String },
}

/// A text correction takes effect when a majority submitted the same one.
fn agreed_correction<'a>(texts: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in texts {
        let t = text::collapse_ws(t);
        if !t.is_empty() {
            *counts.entry(t).or_default() += 1;
        }
    }
    counts.into_iter().find(|(_, n)| *n >= MIN_VOTES).map(|(t, _)| t)
}

/// Applies the quality-control rules to one task's annotations.
pub fn aggregate_task(task: &VerificationTask, batch: &AnnotationBatch) -> Result<AggregateOutcome, AggregateError> {
    if batch.task_id != task.task_id {
        return Err(AggregateError::TaskMismatch { batch: batch.task_id.clone(), task: task.task_id.clone() });
    }
    let found = batch.votes().count();
    if found != ANNOTATORS_PER_TASK {
        return Err(AggregateError::AnnotatorCount { task_id: task.task_id.clone(), found });
    }
    let counts = batch.counts();
    let reject = |reason| {
        let custom_answers = batch.votes().filter_map(|a| a.custom_answer.clone()).collect();
        Ok(AggregateOutcome::Rejected(Rejection { task_id: task.task_id.clone(), reason, custom_answers }))
    };
    let best = counts.iter().copied().max().unwrap_or(0);
    if best < MIN_VOTES {
        return reject(RejectReason::NoMajority);
    }
    let top: Vec<ChoiceId> = (0..counts.len() as u8).filter(|&id| counts[usize::from(id)] == best).collect();
    if top.len() > 1 {
        return reject(RejectReason::Ambiguous);
    }
    let winner = top[0];
    match winner {
        NONE_OF_THE_ABOVE => return reject(RejectReason::NoneOfTheAbove),
        CANNOT_ANSWER => return reject(RejectReason::CannotAnswer),
        _ => {}
    }
    let distractor_ids: Vec<ChoiceId> =
        (0..CONTENT_CHOICES as u8).filter(|&id| counts[usize::from(id)] == 0).take(FINAL_DISTRACTORS).collect();
    if distractor_ids.len() < FINAL_DISTRACTORS {
        return reject(RejectReason::TooFewDistractors);
    }

    let text_of = |id: ChoiceId| {
        agreed_correction(batch.votes().filter_map(|a| a.corrected_texts.get(&id).map(String::as_str)))
            .unwrap_or_else(|| task.choices[usize::from(id)].clone())
    };
    let stem = agreed_correction(batch.votes().filter_map(|a| a.corrected_stem.as_deref()))
        .unwrap_or_else(|| task.stem.clone());
    let correct = text_of(winner);
    let distractors: Vec<String> = distractor_ids.iter().map(|&id| text_of(id)).collect();
    let (choices, label_index) = shuffle_choices(&correct, &distractors, text::fnv1a(task.task_id.as_bytes()));
    let label_changed = winner != task.generated_label;
    let question = SubQuestion {
        question_id: task.question_id.clone(),
        sample_id: task.sample_id.clone(),
        image_id: task.image_id.clone(),
        modality: task.modality,
        stem,
        choices,
        label_index,
        asked_slot: task.asked_slot,
        source_triplet: task.source_triplet.clone(),
        provenance: serde_json::json!({
            "verification": {
                "task_id": task.task_id,
                "winner": winner,
                "winner_votes": best,
                "label_changed": label_changed,
            }
        }),
    };
    Ok(AggregateOutcome::Finalized(FinalizedQuestion { question, winner, winner_votes: best, label_changed, distractor_ids }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationMetrics {
    pub tasks: usize,
    pub annotations: usize,
    pub individual_acc: Option<f64>,
    pub group_acc: Option<f64>,
    pub group_top2_recall: Option<f64>,
    pub iaa: Option<f64>,
    pub iaa_definition: String,
}

pub const IAA_DEFINITION: &str = "mean over tasks of the fraction of annotator pairs with identical selection sets";

/// Choice ids ordered by selection count (descending), ids ascending on ties.
fn ranked_choices(batch: &AnnotationBatch) -> Vec<ChoiceId> {
    let counts = batch.counts();
    let mut ids: Vec<ChoiceId> = (0..counts.len() as u8).filter(|&id| counts[usize::from(id)] > 0).collect();
    ids.sort_by_key(|&id| (std::cmp::Reverse(counts[usize::from(id)]), id));
    ids
}

/// Individual accuracy counts an annotation as correct when its selection set
/// is exactly `{label}`. Group accuracy uses the most-selected choice;
/// top-2 recall asks whether the label is among the two most selected.
/// Batches without a label are ignored.
pub fn annotation_metrics(batches: &[AnnotationBatch], labels: &BTreeMap<String, ChoiceId>) -> AnnotationMetrics {
    let (mut tasks, mut annotations, mut individual) = (0usize, 0usize, 0usize);
    let (mut group, mut top2) = (0usize, 0usize);
    let (mut iaa_sum, mut iaa_tasks) = (0.0, 0usize);
    for b in batches {
        let Some(&label) = labels.get(&b.task_id) else {
            continue;
        };
        let votes: Vec<&Annotation> = b.votes().collect();
        if votes.is_empty() {
            continue;
        }
        tasks += 1;
        annotations += votes.len();
        let want = BTreeSet::from([label]);
        individual += votes.iter().filter(|a| a.selected == want).count();
        let ranked = ranked_choices(b);
        group += usize::from(ranked.first() == Some(&label));
        top2 += usize::from(ranked.iter().take(2).any(|&id| id == label));
        if votes.len() >= 2 {
            let mut agree = 0usize;
            let mut pairs = 0usize;
            for i in 0..votes.len() {
                for j in i + 1..votes.len() {
                    pairs += 1;
                    agree += usize::from(votes[i].selected == votes[j].selected);
                }
            }
            iaa_sum += agree as f64 / pairs as f64;
            iaa_tasks += 1;
        }
    }
    let ratio = |n: usize, d: usize| (d > 0).then(|| n as f64 / d as f64);
    AnnotationMetrics {
        tasks,
        annotations,
        individual_acc: ratio(individual, annotations),
        group_acc: ratio(group, tasks),
        group_top2_recall: ratio(top2, tasks),
        iaa: (iaa_tasks > 0).then(|| iaa_sum / iaa_tasks as f64),
        iaa_definition: IAA_DEFINITION.into(),
    }
}
