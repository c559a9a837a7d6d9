//! Rule-based (Subject, Predicate, Object) extraction and realization.
//!
//! The grammar is deliberately small: a clause is
//! `subject-span (aux* verb | aux* preposition | verb) object-span (preposition np)*`.
//! Each trailing prepositional phrase yields an extra triplet with the
//! clause subject. Statements split into clauses at "because" and "so".
//! Determiners are stripped from parts and restored by [`realize`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Modality, Statement};
use crate::lexicon::{self, VerbForm};
use crate::scorers::ProviderError;
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub modality: Modality,
    pub source_sample: String,
}

/// Modality-free identity used for duplicate detection across modalities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripletKey {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triplet {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
        modality: Modality,
        source_sample: impl Into<String>,
    ) -> Self {
        Triplet {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
            modality,
            source_sample: source_sample.into(),
        }
    }

    pub fn key(&self) -> TripletKey {
        TripletKey {
            subject: text::normalize_concept(&self.subject),
            predicate: text::normalize_for_compare(&self.predicate),
            object: text::normalize_concept(&self.object),
        }
    }

    pub fn is_valid(&self) -> bool {
        [&self.subject, &self.predicate, &self.object].iter().all(|p| {
            !p.trim().is_empty() && !p.contains(['.', '!', '?'])
        })
    }

    pub fn with_part(&self, slot: Slot, value: &str) -> Triplet {
        let mut t = self.clone();
        match slot {
            Slot::Subject => t.subject = value.to_string(),
            Slot::Predicate => t.predicate = value.to_string(),
            Slot::Object => t.object = value.to_string(),
        }
        t
    }

    pub fn part(&self, slot: Slot) -> &str {
        match slot {
            Slot::Subject => &self.subject,
            Slot::Predicate => &self.predicate,
            Slot::Object => &self.object,
        }
    }
}

impl fmt::Display for Triplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Subject,
    Predicate,
    Object,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Subject, Slot::Predicate, Slot::Object];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedSentence {
    pub text: String,
    pub source: Triplet,
}

/// Parses statements into triplets. `rule-v1` is the built-in grammar; an
/// HTTP-backed implementation lives in `scorers::http`.
pub trait StatementParser: Send + Sync {
    fn name(&self) -> &str;
    fn parse(&self, statement: &Statement) -> Result<Vec<Triplet>, ProviderError>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct RuleParser;

impl StatementParser for RuleParser {
    fn name(&self) -> &str {
        "rule-v1"
    }

    fn parse(&self, statement: &Statement) -> Result<Vec<Triplet>, ProviderError> {
        Ok(parse_statement(statement))
    }
}

const BOUNDARY: &str = ",";

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    for (i, chunk) in s.split([',', ';', ':']).enumerate() {
        if i > 0 {
            out.push(BOUNDARY.to_string());
        }
        out.extend(text::words(chunk));
    }
    out
}

fn strip_determiners(tokens: &[String]) -> String {
    tokens
        .iter()
        .filter(|t| !lexicon::is_determiner(t))
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_span_end(tokens: &[String], i: usize) -> bool {
    let t = tokens[i].as_str();
    t == BOUNDARY || lexicon::CONJUNCTIONS.contains(&t) || lexicon::preposition_at(tokens, i).is_some()
}

/// Noun span starting at `i`; returns (text without determiners, end index).
fn noun_span(tokens: &[String], i: usize) -> (String, usize) {
    let mut end = i;
    while end < tokens.len() && !is_span_end(tokens, end) && !lexicon::is_finite_verb(&tokens[end]) {
        end += 1;
    }
    (strip_determiners(&tokens[i..end]), end)
}

fn noun_ok(part: &str) -> bool {
    !part.is_empty() && !text::is_stopword_only(part)
}

fn parse_clause(tokens: &[String]) -> Vec<(String, String, String)> {
    let Some(vi) = tokens.iter().position(|t| lexicon::is_finite_verb(t)) else {
        return Vec::new();
    };
    let pre = &tokens[..vi];
    let pre_prep = (1..pre.len()).find(|&j| lexicon::preposition_at(pre, j).is_some());
    let subject = strip_determiners(&pre[..pre_prep.unwrap_or(pre.len())]);
    let subject = subject.trim_matches(|c| c == ',' || c == ' ').to_string();
    if !noun_ok(&subject) {
        return Vec::new();
    }
    let mut out = Vec::new();
    if let Some(j) = pre_prep {
        let len = lexicon::preposition_at(pre, j).unwrap_or(1);
        let obj = strip_determiners(&pre[j + len..]);
        if noun_ok(&obj) {
            out.push((subject.clone(), pre[j..j + len].join(" "), obj));
        }
    }

    // predicate
    let mut k = vi;
    let mut prepositional = false;
    let mut predicate: Vec<String> = Vec::new();
    if lexicon::is_copula(&tokens[k]) || lexicon::is_modal(&tokens[k]) {
        while k < tokens.len()
            && (lexicon::is_copula(&tokens[k])
                || lexicon::is_modal(&tokens[k])
                || tokens[k] == "not")
        {
            predicate.push(tokens[k].clone());
            k += 1;
        }
        if k < tokens.len() && lexicon::lookup_verb(&tokens[k]).is_some() && !is_span_end(tokens, k) {
            predicate.push(tokens[k].clone());
            k += 1;
        } else if let Some(len) = (k < tokens.len()).then(|| lexicon::preposition_at(tokens, k)).flatten() {
            // copula + preposition: the copula is dropped, the preposition is the predicate
            predicate = tokens[k..k + len].to_vec();
            prepositional = true;
            k += len;
        }
    } else {
        predicate.push(tokens[k].clone());
        k += 1;
    }

    let (mut object, mut end) = noun_span(tokens, k);
    if object.is_empty() && !prepositional {
        if let Some(len) = (end < tokens.len()).then(|| lexicon::preposition_at(tokens, end)).flatten() {
            predicate.extend(tokens[end..end + len].iter().cloned());
            (object, end) = noun_span(tokens, end + len);
        }
    }
    let predicate = predicate.join(" ");
    if noun_ok(&object) {
        out.push((subject.clone(), predicate, object));
    }

    let mut i = end;
    while i < tokens.len() {
        if tokens[i] == BOUNDARY || lexicon::CONJUNCTIONS.contains(&tokens[i].as_str()) {
            break;
        }
        if let Some(len) = lexicon::preposition_at(tokens, i) {
            let (np, next) = noun_span(tokens, i + len);
            if noun_ok(&np) {
                out.push((subject.clone(), tokens[i..i + len].join(" "), np));
            }
            i = next.max(i + len);
        } else {
            i += 1;
        }
    }
    out
}

/// One triplet per clause plus one per trailing prepositional phrase.
/// An empty result is the no-parse signal.
pub fn parse_statement(s: &Statement) -> Vec<Triplet> {
    let tokens = tokenize(&s.text);
    let mut out: Vec<Triplet> = Vec::new();
    for clause in tokens.split(|t| lexicon::CLAUSE_JOINERS.contains(&t.as_str())) {
        for (subj, pred, obj) in parse_clause(clause) {
            if subj == obj {
                continue;
            }
            let t = Triplet::new(subj, pred, obj, s.modality, s.source_sample.clone());
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out
}

/// Subjects that take no article: person tags and pronouns.
pub fn is_bare_reference(phrase: &str) -> bool {
    text::words(phrase)
        .first()
        .is_some_and(|w| text::is_person_tag(w) || text::is_pronoun(w))
}

/// `the boy`, but `person1` and `he` unchanged.
pub fn subject_phrase(subject: &str) -> String {
    if is_bare_reference(subject) {
        subject.to_string()
    } else {
        format!("the {subject}")
    }
}

pub fn copula_for(subject: &str) -> &'static str {
    if lexicon::looks_plural(subject) {
        "are"
    } else {
        "is"
    }
}

/// Predicate with its leading verb agreeing in number with the subject:
/// `is related to` becomes `are related to` for a plural subject.
pub fn agree(predicate: &str, plural: bool) -> String {
    let (first, rest) = predicate.split_once(' ').unwrap_or((predicate, ""));
    let swapped = match (first, plural) {
        ("is", true) => "are".to_string(),
        ("are", false) => "is".to_string(),
        ("was", true) => "were".to_string(),
        ("were", false) => "was".to_string(),
        ("has", true) => "have".to_string(),
        ("have", false) => "has".to_string(),
        ("does", true) => "do".to_string(),
        ("do", false) => "does".to_string(),
        (w, true) => match lexicon::lookup_verb(w) {
            Some((v, VerbForm::Third)) => v.base.to_string(),
            _ => w.to_string(),
        },
        (w, false) => match lexicon::lookup_verb(w) {
            Some((v, VerbForm::Base)) => v.third.to_string(),
            _ => w.to_string(),
        },
    };
    if rest.is_empty() {
        swapped
    } else {
        format!("{swapped} {rest}")
    }
}

/// Lowercase clause without terminal punctuation: `the boy is in front of people`.
pub fn clause_text(t: &Triplet) -> String {
    let subj = subject_phrase(&t.subject);
    if lexicon::is_preposition_phrase(&t.predicate) {
        format!("{subj} {} {} {}", copula_for(&t.subject), t.predicate, t.object)
    } else {
        format!("{subj} {} {}", t.predicate, t.object)
    }
}

/// `(boy, in front of, people)` -> "The boy is in front of people."
pub fn realize(t: &Triplet) -> RealizedSentence {
    RealizedSentence { text: text::as_sentence(&clause_text(t)), source: t.clone() }
}

/// Verb predicates whose progressive form reads badly ("is having").
pub const STATIVE_VERBS: &[&str] = &[
    "have", "want", "need", "desire", "cause", "like", "love", "know", "own", "mean", "require",
    "contain", "involve", "entail", "feel", "think",
];

pub fn is_stative(word: &str) -> bool {
    lexicon::lookup_verb(word).is_some_and(|(v, _)| STATIVE_VERBS.contains(&v.base))
        || STATIVE_VERBS.iter().any(|b| {
            // verbs outside the inflection table still count in their -s form
            word.strip_suffix('s') == Some(b)
        })
}

/// Progressive rendering of a verb predicate for questions:
/// `plays` -> `is playing`, `played` -> `was playing`, `is holding` unchanged.
pub fn progressive(predicate: &str) -> String {
    let ws: Vec<&str> = predicate.split(' ').collect();
    let head = ws[0];
    let tail = ws[1..].join(" ");
    let joined = |aux: &str, verb: &str| {
        if tail.is_empty() {
            format!("{aux} {verb}")
        } else {
            format!("{aux} {verb} {tail}")
        }
    };
    match lexicon::lookup_verb(head) {
        Some((v, VerbForm::Third)) if !is_stative(head) => joined("is", v.gerund),
        Some((v, VerbForm::Past)) if !is_stative(head) => joined("was", v.gerund),
        _ => predicate.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(text: &str) -> Statement {
        Statement { text: text.into(), modality: Modality::Text, source_sample: "s".into() }
    }

    fn spo(ts: &[Triplet]) -> Vec<(&str, &str, &str)> {
        ts.iter().map(|t| (t.subject.as_str(), t.predicate.as_str(), t.object.as_str())).collect()
    }

    #[test]
    fn prepositional_attachment_spawns_triplet() {
        let ts = parse_statement(&st("Person1 plays a trombone in front of everyone."));
        assert_eq!(spo(&ts), vec![("person1", "plays", "trombone"), ("person1", "in front of", "everyone")]);
    }

    #[test]
    fn copula_preposition_becomes_predicate() {
        let ts = parse_statement(&st("The boy is in front of people."));
        assert_eq!(spo(&ts), vec![("boy", "in front of", "people")]);
    }

    #[test]
    fn no_verb_is_no_parse() {
        assert!(parse_statement(&st("Trombone.")).is_empty());
        assert!(parse_statement(&st("Boy in front of people.")).is_empty());
    }

    #[test]
    fn clause_joiner_splits() {
        let ts = parse_statement(&st(
            "Person1 plays a trombone in front of everyone because he is performing a solo.",
        ));
        assert_eq!(
            spo(&ts),
            vec![
                ("person1", "plays", "trombone"),
                ("person1", "in front of", "everyone"),
                ("he", "is performing", "solo")
            ]
        );
    }

    #[test]
    fn empty_object_absorbs_following_preposition() {
        let ts = parse_statement(&st("Person2 is waiting for the bus at the station."));
        assert_eq!(spo(&ts), vec![("person2", "is waiting for", "bus"), ("person2", "at", "station")]);
    }

    #[test]
    fn realize_branches() {
        let t = Triplet::new("boy", "in front of", "people", Modality::Vision, "s");
        assert_eq!(realize(&t).text, "The boy is in front of people.");
        let t = Triplet::new("boy", "plays", "trombone", Modality::Vision, "s");
        assert_eq!(realize(&t).text, "The boy plays trombone.");
        let t = Triplet::new("person1", "plays", "trombone", Modality::Vision, "s");
        assert_eq!(realize(&t).text, "Person1 plays trombone.");
        let t = Triplet::new("people", "near", "stage", Modality::Vision, "s");
        assert_eq!(realize(&t).text, "The people are near stage.");
    }

    #[test]
    fn progressive_forms() {
        assert_eq!(progressive("plays"), "is playing");
        assert_eq!(progressive("is holding"), "is holding");
        assert_eq!(progressive("has"), "has");
        assert_eq!(progressive("wants"), "wants");
    }
}
