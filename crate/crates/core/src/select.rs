//! Relevance ranking of graph triplets and per-modality selection.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{ImageRef, Modality, Statement};
use crate::graph::TripletGraph;
use crate::scorers::{ImageTextScorer, ProviderError, SentenceEncoder};
use crate::svo::{self, Triplet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceScore {
    pub triplet: Triplet,
    pub sentence: String,
    pub text_term: f64,
    pub image_term: f64,
    pub total: f64,
}

/// Descending total, then modality (V < T < BK), then sentence.
pub fn ranking_order(a: &RelevanceScore, b: &RelevanceScore) -> Ordering {
    b.total
        .total_cmp(&a.total)
        .then(a.triplet.modality.cmp(&b.triplet.modality))
        .then_with(|| a.sentence.cmp(&b.sentence))
        .then_with(|| a.triplet.key().cmp(&b.triplet.key()))
}

/// Scores one triplet against the textual statement and the image.
pub fn score_triplet(
    t: &Triplet,
    textual: &Statement,
    image: &ImageRef,
    encoder: &dyn SentenceEncoder,
    image_text: &dyn ImageTextScorer,
) -> Result<RelevanceScore, ProviderError> {
    let sentence = svo::realize(t).text;
    let text_term = encoder.similarity(&sentence, &textual.text)?.abs();
    let image_term = image_text.score(image, &sentence)?.abs();
    Ok(RelevanceScore { triplet: t.clone(), sentence, text_term, image_term, total: text_term + image_term })
}

/// Every triplet of `g`, scored and sorted by [`ranking_order`].
pub fn rank_triplets<G: TripletGraph>(
    g: &G,
    textual: &Statement,
    image: &ImageRef,
    encoder: &dyn SentenceEncoder,
    image_text: &dyn ImageTextScorer,
) -> Result<Vec<RelevanceScore>, ProviderError> {
    let mut out = g
        .triplets()
        .iter()
        .map(|t| score_triplet(t, textual, image, encoder, image_text))
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by(ranking_order);
    Ok(out)
}

/// Top triplet per modality. A triplet already taken by an earlier modality
/// is skipped in favor of the next one of the later modality.
pub fn pick_per_modality(ranked: &[RelevanceScore]) -> BTreeMap<Modality, RelevanceScore> {
    let mut taken = HashSet::new();
    let mut out = BTreeMap::new();
    for m in Modality::ALL {
        if let Some(r) = ranked.iter().find(|r| r.triplet.modality == m && !taken.contains(&r.triplet.key())) {
            taken.insert(r.triplet.key());
            out.insert(m, r.clone());
        }
    }
    out
}

/// Remaining candidates of modality `m` after `pick`, in rank order.
pub fn ranked_for_modality(ranked: &[RelevanceScore], m: Modality) -> impl Iterator<Item = &RelevanceScore> {
    ranked.iter().filter(move |r| r.triplet.modality == m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(s: &str, p: &str, o: &str, m: Modality, total: f64) -> RelevanceScore {
        let t = Triplet::new(s, p, o, m, "x");
        RelevanceScore { sentence: svo::realize(&t).text, triplet: t, text_term: total, image_term: 0.0, total }
    }

    #[test]
    fn one_per_modality() {
        let ranked = vec![
            score("a", "has", "b", Modality::Vision, 1.0),
            score("c", "has", "d", Modality::Text, 0.9),
            score("e", "has", "f", Modality::BackgroundKnowledge, 0.8),
        ];
        assert_eq!(pick_per_modality(&ranked).len(), 3);
        assert_eq!(pick_per_modality(&ranked[..2]).len(), 2);
    }

    #[test]
    fn shared_triplet_goes_to_earlier_modality() {
        let ranked = vec![
            score("boy", "has", "hat", Modality::Text, 2.0),
            score("boy", "has", "hat", Modality::BackgroundKnowledge, 2.0),
            score("hat", "is a type of", "clothing", Modality::BackgroundKnowledge, 1.0),
        ];
        let picks = pick_per_modality(&ranked);
        assert_eq!(picks[&Modality::Text].triplet.object, "hat");
        assert_eq!(picks[&Modality::BackgroundKnowledge].triplet.object, "clothing");
    }
}
