//! Distractor candidates: swap the asked slot's concept for a related one
//! and realize the altered triplet as a sentence.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::kb::{KnowledgeStore, Relation, RelationPool};
use crate::lexicon::{self, VerbForm};
use crate::scorers::{ConceptRealizer, MaskFiller, ProviderError, MASK_TOKEN};
use crate::svo::{self, Slot, Triplet};
use crate::text;

pub const DEFAULT_BUDGET: usize = 8;
pub const MIN_BUDGET: usize = 6;
const NEIGHBOR_SCAN: usize = 64;
const REALIZER_VARIANTS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    ExplicitKb,
    ImplicitMaskfill,
    Realizer,
}

/// Where the replacement concept came from; the first sort key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Retrieval {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistractorCandidate {
    pub text: String,
    pub replacement_concept: String,
    pub source: CandidateSource,
    pub retrieval: Retrieval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_to_answer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_rel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistractError {
    #[error("no distractor candidates for {0}")]
    EmptyCandidateSet(String),
    #[error("candidate budget {0} is below the minimum of {MIN_BUDGET}")]
    BudgetTooSmall(usize),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Clone, Copy)]
pub struct DistractContext<'a> {
    pub kb: &'a KnowledgeStore,
    pub pool: &'a RelationPool,
    pub mask: &'a dyn MaskFiller,
    pub realizer: &'a dyn ConceptRealizer,
}

/// Dedup key: case, punctuation, and articles ignored.
pub fn candidate_key(s: &str) -> String {
    text::words(s).into_iter().filter(|w| !lexicon::is_determiner(w)).collect::<Vec<_>>().join(" ")
}

fn neighbor_concepts(kb: &KnowledgeStore, pool: &RelationPool, key: &str) -> Vec<String> {
    kb.neighbors(key, pool, NEIGHBOR_SCAN)
        .iter()
        .map(|e| e.other(key).to_string())
        .collect()
}

/// Replacement phrases for a noun slot: neighbors of the whole phrase, then
/// of its head (last) word with any modifiers kept. Plural heads are looked
/// up in the singular and their replacements pluralized.
fn noun_replacements(kb: &KnowledgeStore, pool: &RelationPool, phrase: &str) -> Vec<String> {
    let words = text::words(phrase);
    let mut out: Vec<String> = neighbor_concepts(kb, pool, &text::normalize_concept(phrase))
        .iter()
        .map(|c| text::display_concept(c))
        .collect();
    let Some((head, modifiers)) = words.split_last() else {
        return out;
    };
    let plural = lexicon::looks_plural(head);
    let singular = lexicon::singularize(head);
    let mut keys = Vec::new();
    if !modifiers.is_empty() {
        keys.push(head.clone());
    }
    if singular != *head {
        keys.push(singular);
    }
    for key in keys {
        for c in neighbor_concepts(kb, pool, &key) {
            let c = text::display_concept(&c);
            let c = if plural { lexicon::pluralize(&c) } else { c };
            out.push(modifiers.iter().map(String::as_str).chain([c.as_str()]).collect::<Vec<_>>().join(" "));
        }
    }
    out
}

/// Replacement predicates: a relation phrase swaps for the pool's other
/// relations; a preposition phrase is looked up whole; a verb phrase by the
/// base form of its main verb, reinflected on the way out.
fn predicate_replacements(kb: &KnowledgeStore, pool: &RelationPool, predicate: &str) -> Vec<String> {
    let plural = predicate.split_whitespace().next().is_some_and(|w| matches!(w, "are" | "were" | "have" | "do"));
    if let Some(own) = Relation::ALL.iter().find(|r| svo::agree(r.phrase(), plural) == predicate) {
        return pool
            .relations
            .iter()
            .filter(|r| *r != own)
            .map(|r| svo::agree(r.phrase(), plural))
            .collect();
    }
    if lexicon::is_preposition_phrase(predicate) {
        return neighbor_concepts(kb, pool, &text::normalize_concept(predicate))
            .into_iter()
            .map(|c| text::display_concept(&c))
            .collect();
    }
    let words: Vec<&str> = predicate.split_whitespace().collect();
    let Some((pos, verb, form)) = words.iter().enumerate().find_map(|(i, w)| {
        if lexicon::is_auxiliary(w) {
            return None;
        }
        lexicon::lookup_verb(w).map(|(v, f)| (i, v, f))
    }) else {
        return Vec::new();
    };
    neighbor_concepts(kb, pool, verb.base)
        .into_iter()
        .filter(|c| !c.contains('_'))
        .filter_map(|c| {
            let (replacement, _) = lexicon::lookup_verb(&c)?;
            let mut ws: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            ws[pos] = if form == VerbForm::Base { replacement.base.to_string() } else { lexicon::inflect(replacement.base, form) };
            Some(ws.join(" "))
        })
        .collect()
}

/// Candidate distractors for `slot` of `t`, at most `budget`, sorted by
/// (retrieval, text). The correct answer and duplicates are removed.
pub fn gen_candidates(
    t: &Triplet,
    slot: Slot,
    correct: &str,
    budget: usize,
    ctx: DistractContext<'_>,
) -> Result<Vec<DistractorCandidate>, DistractError> {
    if budget < MIN_BUDGET {
        return Err(DistractError::BudgetTooSmall(budget));
    }
    let original = t.part(slot);
    let original_key = candidate_key(original);
    let forbidden: HashSet<String> =
        [original_key.clone(), candidate_key(&t.subject), candidate_key(&t.object)].into_iter().collect();

    let explicit = match slot {
        Slot::Subject | Slot::Object => noun_replacements(ctx.kb, ctx.pool, original),
        Slot::Predicate => predicate_replacements(ctx.kb, ctx.pool, original),
    };
    let mut replacements: Vec<(String, Retrieval)> = Vec::new();
    let mut seen_concepts = HashSet::new();
    let mut push = |c: String, r: Retrieval, out: &mut Vec<(String, Retrieval)>| {
        let key = candidate_key(&c);
        if !key.is_empty() && !forbidden.contains(&key) && seen_concepts.insert(key) {
            out.push((c, r));
        }
    };
    for c in explicit {
        push(c, Retrieval::Explicit, &mut replacements);
    }
    if slot == Slot::Object && replacements.len() < budget {
        let prompt = svo::clause_text(&t.with_part(Slot::Object, MASK_TOKEN));
        for c in ctx.mask.fill(&prompt, budget)? {
            push(c, Retrieval::Implicit, &mut replacements);
        }
    }

    let correct_key = candidate_key(correct);
    let mut seen = HashSet::from([correct_key]);
    let mut out = Vec::new();
    for (concept, retrieval) in replacements {
        let altered = t.with_part(slot, &concept);
        let rule_source = match retrieval {
            Retrieval::Explicit => CandidateSource::ExplicitKb,
            Retrieval::Implicit => CandidateSource::ImplicitMaskfill,
        };
        let concepts = [altered.subject.clone(), altered.predicate.clone(), altered.object.clone()];
        let mut texts = vec![(svo::realize(&altered).text, rule_source)];
        texts.extend(
            ctx.realizer.realize(&concepts, REALIZER_VARIANTS)?.into_iter().map(|s| (s, CandidateSource::Realizer)),
        );
        for (text, source) in texts {
            if seen.insert(candidate_key(&text)) {
                out.push(DistractorCandidate {
                    text,
                    replacement_concept: concept.clone(),
                    source,
                    retrieval,
                    sim_to_answer: None,
                    image_rel: None,
                });
            }
        }
    }
    out.sort_by(|a, b| a.retrieval.cmp(&b.retrieval).then_with(|| a.text.cmp(&b.text)));
    out.truncate(budget);
    if out.is_empty() {
        return Err(DistractError::EmptyCandidateSet(t.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Modality;
    use crate::kb::{KnowledgeEdge, Relation};
    use crate::scorers::offline::{KbMaskFiller, RuleRealizer};
    use std::sync::Arc;

    fn edge(s: &str, r: Relation, o: &str) -> KnowledgeEdge {
        KnowledgeEdge { subject: s.into(), relation: r, object: o.into(), weight: 1.0 }
    }

    #[test]
    fn predicate_swap_yields_behind() {
        let kb = Arc::new(KnowledgeStore::from_edges([
            edge("in_front_of", Relation::Antonym, "behind"),
            edge("in_front_of", Relation::RelatedTo, "direction"),
            edge("in_front_of", Relation::RelatedTo, "location"),
        ]));
        let pool = RelationPool::distractor();
        let mask = KbMaskFiller::new(kb.clone(), pool.clone());
        let ctx = DistractContext { kb: &kb, pool: &pool, mask: &mask, realizer: &RuleRealizer };
        let t = Triplet::new("boy", "in front of", "people", Modality::Vision, "x");
        let c = gen_candidates(&t, Slot::Predicate, "The boy is in front of people.", 8, ctx).unwrap();
        let texts: Vec<_> = c.iter().map(|c| c.text.as_str()).collect();
        assert!(texts.contains(&"The boy is behind people."), "{texts:?}");
        assert!(c.iter().all(|c| c.replacement_concept != "in front of"));
    }

    #[test]
    fn verb_predicates_are_reinflected() {
        let kb = KnowledgeStore::from_edges([edge("hold", Relation::Antonym, "drop")]);
        assert_eq!(predicate_replacements(&kb, &RelationPool::distractor(), "is holding"), vec!["is dropping"]);
        assert_eq!(predicate_replacements(&kb, &RelationPool::distractor(), "holds"), vec!["drops"]);
    }

    #[test]
    fn plural_heads_keep_number() {
        let kb = KnowledgeStore::from_edges([edge("woman", Relation::Antonym, "man")]);
        assert_eq!(noun_replacements(&kb, &RelationPool::distractor(), "two women"), vec!["two men"]);
    }

    #[test]
    fn relation_phrases_swap_for_other_relations() {
        let kb = KnowledgeStore::default();
        let out = predicate_replacements(&kb, &RelationPool::distractor(), "are related to");
        assert!(out.contains(&"are the opposite of".to_string()), "{out:?}");
        assert!(!out.contains(&"are related to".to_string()));
        assert_eq!(out.len(), RelationPool::distractor().relations.len() - 1);
    }

    #[test]
    fn small_budget_rejected() {
        let kb = KnowledgeStore::default();
        let pool = RelationPool::distractor();
        let mask = KbMaskFiller::new(Arc::new(KnowledgeStore::default()), pool.clone());
        let ctx = DistractContext { kb: &kb, pool: &pool, mask: &mask, realizer: &RuleRealizer };
        let t = Triplet::new("boy", "in front of", "people", Modality::Vision, "x");
        assert_eq!(gen_candidates(&t, Slot::Object, "x", 5, ctx), Err(DistractError::BudgetTooSmall(5)));
        assert!(matches!(gen_candidates(&t, Slot::Object, "x", 6, ctx), Err(DistractError::EmptyCandidateSet(_))));
    }
}
