//! Deterministic offline baselines. None of these touch the network and all
//! of them are bitwise reproducible.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::corpus::ImageRef;
use crate::kb::{KnowledgeStore, RelationPool};
use crate::lexicon;
use crate::svo;
use crate::text;

use super::{
    check_mask, ConceptRealizer, Embedding, GrammarChecker, GrammarVerdict, ImageTextScorer, MaskFiller,
    ProviderError, SentenceEncoder,
};

pub const BOW_DIMENSION: usize = 256;

/// Hashed bag of words: every lowercase token (stopwords included) is
/// counted in bucket `fnv1a(token) % 256`.
#[derive(Debug, Default, Clone, Copy)]
pub struct HashedBow;

impl HashedBow {
    pub fn bucket(token: &str) -> usize {
        (text::fnv1a(token.as_bytes()) % BOW_DIMENSION as u64) as usize
    }

    pub fn counts(s: &str) -> [u64; BOW_DIMENSION] {
        let mut counts = [0u64; BOW_DIMENSION];
        for w in text::words(s) {
            counts[Self::bucket(&w)] += 1;
        }
        counts
    }
}

impl SentenceEncoder for HashedBow {
    fn name(&self) -> &str {
        "hashed-bow-256"
    }

    fn embed(&self, s: &str) -> Result<Embedding, ProviderError> {
        let counts = Self::counts(s);
        let norm = (counts.iter().map(|c| c * c).sum::<u64>() as f64).sqrt();
        let values = counts
            .iter()
            .map(|&c| if norm == 0.0 { 0.0 } else { c as f64 / norm })
            .collect();
        Ok(Embedding::new(values))
    }

    /// Computed from integer counts so that identical inputs give exactly 1.0
    /// and the result is symmetric bit for bit.
    fn similarity(&self, a: &str, b: &str) -> Result<f64, ProviderError> {
        let (ca, cb) = (Self::counts(a), Self::counts(b));
        let dot: u64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
        let na: u64 = ca.iter().map(|c| c * c).sum();
        let nb: u64 = cb.iter().map(|c| c * c).sum();
        if na == 0 || nb == 0 {
            return Ok(0.0);
        }
        Ok(dot as f64 / ((na as f64) * (nb as f64)).sqrt())
    }
}

/// Jaccard overlap between the image's object tags and the sentence's
/// content tokens.
#[derive(Debug, Default, Clone, Copy)]
pub struct TagJaccard;

impl ImageTextScorer for TagJaccard {
    fn name(&self) -> &str {
        "tag-jaccard"
    }

    fn score(&self, image: &ImageRef, s: &str) -> Result<f64, ProviderError> {
        let tags: BTreeSet<String> = image.object_tags.iter().flat_map(|t| text::content_tokens(t)).collect();
        let tokens: BTreeSet<String> = text::content_tokens(s).into_iter().collect();
        let union = tags.union(&tokens).count();
        if union == 0 {
            return Ok(0.0);
        }
        Ok(tags.intersection(&tokens).count() as f64 / union as f64)
    }
}

/// Fills `[mask]` with knowledge-store neighbors of the prompt's head noun.
#[derive(Debug, Clone)]
pub struct KbMaskFiller {
    kb: Arc<KnowledgeStore>,
    pool: RelationPool,
}

const MASK_NEIGHBOR_SCAN: usize = 64;

impl KbMaskFiller {
    pub fn new(kb: Arc<KnowledgeStore>, pool: RelationPool) -> Self {
        KbMaskFiller { kb, pool }
    }

    /// Noun phrase before the first verb or preposition, determiners removed.
    fn head_phrase(prompt: &str) -> Vec<String> {
        let tokens = text::words(prompt);
        let end = (0..tokens.len())
            .find(|&i| {
                lexicon::is_auxiliary(&tokens[i])
                    || lexicon::is_finite_verb(&tokens[i])
                    || lexicon::preposition_at(&tokens, i).is_some()
                    || tokens[i] == "mask"
            })
            .unwrap_or(tokens.len());
        tokens[..end].iter().filter(|t| !lexicon::is_determiner(t)).cloned().collect()
    }
}

impl MaskFiller for KbMaskFiller {
    fn name(&self) -> &str {
        "kb-neighbors"
    }

    fn fill(&self, prompt: &str, n: usize) -> Result<Vec<String>, ProviderError> {
        check_mask(prompt)?;
        let head = Self::head_phrase(prompt);
        if head.is_empty() {
            return Ok(Vec::new());
        }
        let prompt_words: BTreeSet<String> = text::words(prompt).into_iter().collect();
        // whole phrase first, then its last word
        let mut keys = vec![head.join("_")];
        if head.len() > 1 {
            keys.push(head[head.len() - 1].clone());
        }
        let mut out: Vec<String> = Vec::new();
        for key in keys {
            for e in self.kb.neighbors(&key, &self.pool, MASK_NEIGHBOR_SCAN) {
                let other = e.other(&key);
                if other.contains('_') || prompt_words.contains(other) || out.iter().any(|o| o == other) {
                    continue;
                }
                out.push(other.to_string());
                if out.len() == n {
                    return Ok(out);
                }
            }
        }
        Ok(out)
    }
}

/// "The c1 [is] c2 the c3." for three concepts.
#[derive(Debug, Default, Clone, Copy)]
pub struct RuleRealizer;

fn noun_phrase(concept: &str) -> String {
    if svo::is_bare_reference(concept) {
        concept.to_string()
    } else {
        format!("the {concept}")
    }
}

impl ConceptRealizer for RuleRealizer {
    fn name(&self) -> &str {
        "rule-realizer"
    }

    fn realize(&self, concepts: &[String], n: usize) -> Result<Vec<String>, ProviderError> {
        let [c1, c2, c3] = concepts else {
            return Ok(Vec::new());
        };
        if n == 0 {
            return Ok(Vec::new());
        }
        let (c1, c2, c3) = (text::display_concept(c1), text::display_concept(c2), text::display_concept(c3));
        let middle = if lexicon::is_preposition_phrase(&c2) {
            format!("{} {c2}", svo::copula_for(&c1))
        } else {
            c2
        };
        Ok(vec![text::as_sentence(&format!("{} {middle} {}", noun_phrase(&c1), noun_phrase(&c3)))])
    }
}

/// Structural checks plus casing and punctuation repair.
#[derive(Debug, Default, Clone, Copy)]
pub struct RuleGrammar;

impl RuleGrammar {
    pub fn correct(s: &str) -> String {
        let body = text::collapse_ws(s);
        let stripped = text::strip_terminal(&body);
        let mark = match body[stripped.len()..].trim().chars().find(|c| matches!(c, '?' | '!')) {
            Some(c) => c,
            None => '.',
        };
        text::sentence_case(&text::terminate(stripped, mark))
    }
}

impl GrammarChecker for RuleGrammar {
    fn name(&self) -> &str {
        "rule-grammar"
    }

    fn check(&self, s: &str) -> Result<GrammarVerdict, ProviderError> {
        let tokens = text::words(s);
        let has_verb = tokens.iter().any(|w| lexicon::is_auxiliary(w) || lexicon::lookup_verb(w).is_some());
        let balanced = s.chars().filter(|&c| c == '"').count() % 2 == 0;
        Ok(GrammarVerdict { ok: !tokens.is_empty() && has_verb && balanced, corrected: Self::correct(s) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{KnowledgeEdge, Relation};

    #[test]
    fn identical_sentences_have_similarity_exactly_one() {
        let s = "The boy is in front of people.";
        assert_eq!(HashedBow.similarity(s, s).unwrap(), 1.0);
        assert_eq!(HashedBow.similarity("", s).unwrap(), 0.0);
    }

    #[test]
    fn embedding_is_unit_norm() {
        let e = HashedBow.embed("a man plays a trombone").unwrap();
        assert_eq!(e.dimension(), BOW_DIMENSION);
        assert!((e.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jaccard_hand_example() {
        let img = ImageRef { image_id: "i".into(), object_tags: vec!["boy".into(), "trombone".into(), "stage".into()] };
        assert_eq!(TagJaccard.score(&img, "The boy plays trombone.").unwrap(), 0.5);
        assert_eq!(TagJaccard.score(&img, "Boy trombone stage.").unwrap(), 1.0);
        assert_eq!(TagJaccard.score(&img, "A cat sleeps.").unwrap(), 0.0);
    }

    #[test]
    fn mask_fill_uses_kb_neighbors() {
        let kb = Arc::new(KnowledgeStore::from_edges([
            KnowledgeEdge { subject: "boy".into(), relation: Relation::AtLocation, object: "school".into(), weight: 1.0 },
            KnowledgeEdge { subject: "boy".into(), relation: Relation::IsA, object: "male_child".into(), weight: 3.0 },
        ]));
        let m = KbMaskFiller::new(kb, RelationPool::distractor());
        assert_eq!(m.fill("boy is in front of [mask]", 5).unwrap(), vec!["school"]);
        assert!(matches!(m.fill("boy is in front of", 5), Err(ProviderError::InvalidPrompt(_))));
    }

    #[test]
    fn rule_realizer_branches() {
        let c = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(RuleRealizer.realize(&c(&["boy", "behind", "people"]), 3).unwrap(), vec![
            "The boy is behind the people."
        ]);
        assert_eq!(RuleRealizer.realize(&c(&["person1", "plays", "trombone"]), 1).unwrap(), vec![
            "Person1 plays the trombone."
        ]);
        assert!(RuleRealizer.realize(&c(&["boy"]), 1).unwrap().is_empty());
    }

    #[test]
    fn grammar_cases() {
        let v = RuleGrammar.check("the boy is behind people").unwrap();
        assert!(v.ok);
        assert_eq!(v.corrected, "The boy is behind people.");
        assert!(!RuleGrammar.check("Boy people.").unwrap().ok);
        let fine = "The boy is behind people.";
        assert_eq!(RuleGrammar.check(fine).unwrap(), GrammarVerdict { ok: true, corrected: fine.into() });
        assert_eq!(RuleGrammar::correct("who is there ?!"), "Who is there?");
        assert!(!RuleGrammar.check("He said \"hi.").unwrap().ok);
    }
}
