//! Question stems from triplets.
//!
//! The answer is always the full realized sentence of the source triplet;
//! the stem asks about one slot of it.

use serde::{Deserialize, Serialize};

use crate::corpus::Modality;
use crate::lexicon::{self, VerbForm};
use crate::svo::{self, Slot, Triplet};
use crate::text;

/// Wire form of a triplet in output records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletRef {
    pub s: String,
    pub p: String,
    pub o: String,
}

impl From<&Triplet> for TripletRef {
    fn from(t: &Triplet) -> Self {
        TripletRef { s: t.subject.clone(), p: t.predicate.clone(), o: t.object.clone() }
    }
}

impl TripletRef {
    pub fn to_triplet(&self, modality: Modality, sample_id: &str) -> Triplet {
        Triplet::new(self.s.clone(), self.p.clone(), self.o.clone(), modality, sample_id)
    }
}

/// One generated multiple-choice sub-question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubQuestion {
    pub question_id: String,
    pub sample_id: String,
    pub image_id: String,
    pub modality: Modality,
    pub stem: String,
    pub choices: Vec<String>,
    pub label_index: usize,
    pub asked_slot: Slot,
    pub source_triplet: TripletRef,
    #[serde(default)]
    pub provenance: serde_json::Value,
}

impl SubQuestion {
    pub fn correct_answer(&self) -> &str {
        &self.choices[self.label_index]
    }

    /// Exactly 4 pairwise-distinct choices, a valid label, a `?` stem.
    pub fn check(&self) -> Result<(), String> {
        if self.choices.len() != 4 {
            return Err(format!("{}: {} choices", self.question_id, self.choices.len()));
        }
        if self.label_index >= 4 {
            return Err(format!("{}: label {}", self.question_id, self.label_index));
        }
        let mut seen: Vec<String> = self.choices.iter().map(|c| text::normalize_for_compare(c)).collect();
        seen.sort();
        seen.dedup();
        if seen.len() != 4 {
            return Err(format!("{}: duplicate choices", self.question_id));
        }
        if !self.stem.ends_with('?') {
            return Err(format!("{}: stem must end with '?'", self.question_id));
        }
        Ok(())
    }
}

pub fn question_id(sample_id: &str, modality: Modality) -> String {
    format!("{sample_id}-{}", modality.code())
}

/// Per-question seed derived from the run seed.
pub fn question_seed(seed: u64, salt: &str, question_id: &str) -> u64 {
    text::fnv1a(format!("{seed}\u{1f}{salt}\u{1f}{question_id}").as_bytes())
}

fn join_words(parts: &[&str]) -> String {
    parts.iter().filter(|p| !p.is_empty()).copied().collect::<Vec<_>>().join(" ")
}

fn is_person_only(phrase: &str) -> bool {
    let ws = text::words(phrase);
    !ws.is_empty() && ws.iter().all(|w| text::is_person_tag(w))
}

/// "What is the boy in front of?", "What is person2 holding?", ...
fn object_stem(t: &Triplet) -> String {
    let subj = svo::subject_phrase(&t.subject);
    let p = t.predicate.as_str();
    let words: Vec<&str> = p.split_whitespace().collect();
    if lexicon::is_preposition_phrase(p) {
        return format!("What {} {subj} {p}?", svo::copula_for(&t.subject));
    }
    let head = words.first().copied().unwrap_or_default();
    let rest = words.get(1..).map(|r| r.join(" ")).unwrap_or_default();
    if lexicon::is_auxiliary(head) {
        return format!("What {}?", join_words(&[head, &subj, &rest]));
    }
    match lexicon::lookup_verb(head) {
        Some((v, form @ (VerbForm::Third | VerbForm::Past))) => {
            let past = form == VerbForm::Past;
            if svo::is_stative(head) {
                let aux = if past { "did" } else { "does" };
                format!("What {}?", join_words(&[aux, &subj, v.base, &rest]))
            } else {
                let aux = match (past, lexicon::looks_plural(&t.subject)) {
                    (false, false) => "is",
                    (false, true) => "are",
                    (true, false) => "was",
                    (true, true) => "were",
                };
                format!("What {}?", join_words(&[aux, &subj, v.gerund, &rest]))
            }
        }
        _ => format!("What {}?", join_words(&[svo::copula_for(&t.subject), &subj, p])),
    }
}

/// "Who is playing trombone?", "What is in front of people?"
fn subject_stem(t: &Triplet) -> String {
    let wh = if svo::is_bare_reference(&t.subject) { "Who" } else { "What" };
    let p = t.predicate.as_str();
    let verb_phrase = if lexicon::is_preposition_phrase(p) {
        format!("is {p}")
    } else {
        let mut ws: Vec<String> = svo::progressive(p).split_whitespace().map(str::to_string).collect();
        // the wh-word is grammatically singular
        match ws.first().map(String::as_str) {
            Some("are") => ws[0] = "is".into(),
            Some("were") => ws[0] = "was".into(),
            _ => {}
        }
        ws.join(" ")
    };
    format!("{wh} {verb_phrase} {}?", t.object)
}

fn predicate_stem(t: &Triplet) -> String {
    format!("What is the relationship between {} and {}?", svo::subject_phrase(&t.subject), t.object)
}

/// Stem and correct answer for `slot` of `t`.
pub fn make_question(t: &Triplet, slot: Slot) -> (String, String) {
    let stem = match slot {
        Slot::Subject => subject_stem(t),
        Slot::Predicate => predicate_stem(t),
        Slot::Object => object_stem(t),
    };
    (text::sentence_case(&stem), svo::realize(t).text)
}

/// Slots whose template applies: the stem must not reveal the asked part,
/// and person-to-person triplets are never asked about their object.
pub fn applicable_slots(t: &Triplet) -> Vec<Slot> {
    Slot::ALL
        .into_iter()
        .filter(|&slot| {
            if slot == Slot::Object && is_person_only(&t.subject) && is_person_only(&t.object) {
                return false;
            }
            let (stem, _) = make_question(t, slot);
            !text::contains_phrase(&stem, t.part(slot))
        })
        .collect()
}

/// [`applicable_slots`] rotated to start at a seeded uniform choice; later
/// entries are fallbacks when the first slot yields no question.
pub fn slot_order(t: &Triplet, seed: u64) -> Vec<Slot> {
    let mut slots = applicable_slots(t);
    if !slots.is_empty() {
        let k = (seed % slots.len() as u64) as usize;
        slots.rotate_left(k);
    }
    slots
}

/// Seeded uniform choice among [`applicable_slots`]; `None` if none apply.
pub fn choose_slot(t: &Triplet, seed: u64) -> Option<Slot> {
    slot_order(t, seed).first().copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, p: &str, o: &str) -> Triplet {
        Triplet::new(s, p, o, Modality::Text, "x")
    }

    #[test]
    fn object_templates() {
        assert_eq!(make_question(&t("boy", "in front of", "people"), Slot::Object).0, "What is the boy in front of?");
        assert_eq!(make_question(&t("person2", "is holding", "cup"), Slot::Object).0, "What is person2 holding?");
        assert_eq!(make_question(&t("person1", "plays", "trombone"), Slot::Object).0, "What is person1 playing?");
        assert_eq!(make_question(&t("person1", "has", "cup"), Slot::Object).0, "What does person1 have?");
        assert_eq!(
            make_question(&t("trombone", "is a type of", "brass instrument"), Slot::Object).0,
            "What is the trombone a type of?"
        );
        assert_eq!(make_question(&t("people", "watched", "show"), Slot::Object).0, "What were the people watching?");
    }

    #[test]
    fn subject_and_predicate_templates() {
        let (stem, answer) = make_question(&t("person1", "plays", "trombone"), Slot::Subject);
        assert_eq!(stem, "Who is playing trombone?");
        assert_eq!(answer, "Person1 plays trombone.");
        assert_eq!(make_question(&t("boy", "in front of", "people"), Slot::Subject).0, "What is in front of people?");
        assert_eq!(
            make_question(&t("boy", "in front of", "people"), Slot::Predicate).0,
            "What is the relationship between the boy and people?"
        );
    }

    #[test]
    fn person_pair_excludes_object() {
        let slots = applicable_slots(&t("person1", "is talking to", "person2"));
        assert!(!slots.contains(&Slot::Object));
        assert!(!slots.is_empty());
    }

    #[test]
    fn seeds_cover_all_slots() {
        let tr = t("boy", "in front of", "people");
        let seen: std::collections::BTreeSet<_> = (0..3).filter_map(|s| choose_slot(&tr, s)).collect();
        assert_eq!(seen.len(), 3);
    }
}
