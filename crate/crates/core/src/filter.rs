//! Adversarial filtering of distractor candidates and final assembly.
//!
//! Steps run in a fixed order: grammar repair (failures dropped), removal of
//! candidates too similar to the reference sentence, then the top
//! `final_count` by image relevance.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ImageRef, Modality};
use crate::distract::{candidate_key, DistractorCandidate};
use crate::qagen::{SubQuestion, TripletRef};
use crate::svo::Slot;
use crate::scorers::{GrammarChecker, ImageTextScorer, ProviderError, SentenceEncoder};

pub const DEFAULT_SIMILARITY_CUTOFF: f64 = 0.7;
pub const DEFAULT_FINAL_COUNT: usize = 3;

/// What the similarity cutoff compares candidates against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareAgainst {
    #[default]
    TextualStatement,
    CorrectAnswer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default = "default_cutoff")]
    pub similarity_cutoff: f64,
    #[serde(default = "default_final_count")]
    pub final_count: usize,
    #[serde(default)]
    pub shuffle_seed: u64,
    #[serde(default)]
    pub compare_against: CompareAgainst,
}

fn default_cutoff() -> f64 {
    DEFAULT_SIMILARITY_CUTOFF
}

fn default_final_count() -> usize {
    DEFAULT_FINAL_COUNT
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            similarity_cutoff: DEFAULT_SIMILARITY_CUTOFF,
            final_count: DEFAULT_FINAL_COUNT,
            shuffle_seed: 0,
            compare_against: CompareAgainst::TextualStatement,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.similarity_cutoff > 0.0 && self.similarity_cutoff <= 1.0) {
            return Err(format!("similarity_cutoff {} must be in (0, 1]", self.similarity_cutoff));
        }
        if self.final_count == 0 {
            return Err("final_count must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("only {found} distractors survived filtering, {needed} needed")]
    InsufficientDistractors { needed: usize, found: usize },
    #[error("a question needs exactly 3 distractors, final_count is {0}")]
    FinalCount(usize),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Clone, Copy)]
pub struct FilterProviders<'a> {
    pub grammar: &'a dyn GrammarChecker,
    pub encoder: &'a dyn SentenceEncoder,
    pub image_text: &'a dyn ImageTextScorer,
}

/// Survivors plus per-step drop counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub kept: Vec<DistractorCandidate>,
    pub dropped_grammar: usize,
    pub dropped_similarity: usize,
    pub dropped_rank: usize,
}

/// Runs the three filter steps and keeps `final_count` candidates.
/// `reference` is the sentence the similarity cutoff is measured against.
pub fn filter_distractors(
    candidates: &[DistractorCandidate],
    correct: &str,
    reference: &str,
    image: &ImageRef,
    cfg: &FilterConfig,
    p: FilterProviders<'_>,
) -> Result<FilterOutcome, FilterError> {
    let mut seen: HashSet<String> = HashSet::from([candidate_key(correct)]);
    let mut dropped_grammar = 0;
    let mut graded = Vec::new();
    for c in candidates {
        let verdict = p.grammar.check(&c.text)?;
        if !verdict.ok || !seen.insert(candidate_key(&verdict.corrected)) {
            dropped_grammar += 1;
            continue;
        }
        graded.push(DistractorCandidate { text: verdict.corrected, ..c.clone() });
    }

    let mut dropped_similarity = 0;
    let mut close_enough = Vec::new();
    for mut c in graded {
        let sim = p.encoder.similarity(&c.text, reference)?;
        c.sim_to_answer = Some(sim);
        if sim > cfg.similarity_cutoff {
            dropped_similarity += 1;
        } else {
            close_enough.push(c);
        }
    }

    for c in &mut close_enough {
        c.image_rel = Some(p.image_text.score(image, &c.text)?);
    }
    close_enough.sort_by(|a, b| {
        let (ra, rb) = (a.image_rel.unwrap_or(0.0), b.image_rel.unwrap_or(0.0));
        rb.total_cmp(&ra).then_with(|| a.text.cmp(&b.text))
    });
    if close_enough.len() < cfg.final_count {
        return Err(FilterError::InsufficientDistractors { needed: cfg.final_count, found: close_enough.len() });
    }
    let dropped_rank = close_enough.len() - cfg.final_count;
    close_enough.truncate(cfg.final_count);
    Ok(FilterOutcome { kept: close_enough, dropped_grammar, dropped_similarity, dropped_rank })
}

/// Correct answer plus distractors in seeded random order; returns the
/// choices and the index of the correct one.
pub fn shuffle_choices(correct: &str, distractors: &[String], seed: u64) -> (Vec<String>, usize) {
    let mut order: Vec<usize> = (0..=distractors.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let choices = order
        .iter()
        .map(|&i| if i == 0 { correct.to_string() } else { distractors[i - 1].clone() })
        .collect();
    let label = order.iter().position(|&i| i == 0).expect("correct answer present");
    (choices, label)
}

/// Everything about a question except its distractors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionDraft {
    pub question_id: String,
    pub sample_id: String,
    pub image_id: String,
    pub modality: Modality,
    pub stem: String,
    pub correct: String,
    pub asked_slot: Slot,
    pub source_triplet: TripletRef,
}

/// Filters `candidates` and assembles a four-choice question. Assembly
/// needs exactly three distractors, so any other `cfg.final_count` is an error.
pub fn filter_and_assemble(
    candidates: &[DistractorCandidate],
    draft: &QuestionDraft,
    reference: &str,
    image: &ImageRef,
    cfg: &FilterConfig,
    p: FilterProviders<'_>,
) -> Result<(SubQuestion, FilterOutcome), FilterError> {
    if cfg.final_count != DEFAULT_FINAL_COUNT {
        return Err(FilterError::FinalCount(cfg.final_count));
    }
    let outcome = filter_distractors(candidates, &draft.correct, reference, image, cfg, p)?;
    let texts: Vec<String> = outcome.kept.iter().map(|c| c.text.clone()).collect();
    let (choices, label_index) = shuffle_choices(&draft.correct, &texts, cfg.shuffle_seed);
    let question = SubQuestion {
        question_id: draft.question_id.clone(),
        sample_id: draft.sample_id.clone(),
        image_id: draft.image_id.clone(),
        modality: draft.modality,
        stem: draft.stem.clone(),
        choices,
        label_index,
        asked_slot: draft.asked_slot,
        source_triplet: draft.source_triplet.clone(),
        provenance: serde_json::Value::Null,
    };
    Ok((question, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distract::{CandidateSource, Retrieval};
    use crate::scorers::offline::{HashedBow, RuleGrammar, TagJaccard};

    fn cand(text: &str) -> DistractorCandidate {
        DistractorCandidate {
            text: text.into(),
            replacement_concept: "x".into(),
            source: CandidateSource::ExplicitKb,
            retrieval: Retrieval::Explicit,
            sim_to_answer: None,
            image_rel: None,
        }
    }

    fn providers() -> FilterProviders<'static> {
        FilterProviders { grammar: &RuleGrammar, encoder: &HashedBow, image_text: &TagJaccard }
    }

    #[test]
    fn copy_of_reference_is_dropped() {
        let image = ImageRef { image_id: "i".into(), object_tags: vec![] };
        let reference = "The dog chases a ball.";
        let cands = [cand(reference), cand("A cat sleeps."), cand("Birds sing."), cand("Fish swim.")];
        let cfg = FilterConfig::default();
        let out = filter_distractors(&cands, "The dog runs.", reference, &image, &cfg, providers()).unwrap();
        assert_eq!(out.dropped_similarity, 1);
        assert!(out.kept.iter().all(|c| c.text != reference));
    }

    #[test]
    fn too_few_survivors() {
        let image = ImageRef { image_id: "i".into(), object_tags: vec![] };
        let cfg = FilterConfig::default();
        let err = filter_distractors(&[cand("A cat sleeps.")], "x", "y", &image, &cfg, providers()).unwrap_err();
        assert_eq!(err, FilterError::InsufficientDistractors { needed: 3, found: 1 });
    }

    #[test]
    fn shuffle_is_seeded_permutation() {
        let d = vec!["b".to_string(), "c".into(), "d".into()];
        let (c1, l1) = shuffle_choices("a", &d, 7);
        assert_eq!(shuffle_choices("a", &d, 7), (c1.clone(), l1));
        assert_eq!(c1[l1], "a");
        let mut sorted = c1.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["a", "b", "c", "d"]);
    }
}
