//! Input records, statement construction, and keyword extraction.
//!
//! A [`SampleRecord`] is one image–question–answer unit. Three kinds of
//! [`Statement`] are derived from it: the caption (vision), a declarative
//! rewrite of the question plus its correct answer (text), and realized
//! knowledge-store facts (background knowledge, built in `pipeline`).

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lexicon::{self, VerbForm};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Vision,
    Text,
    BackgroundKnowledge,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Vision, Modality::Text, Modality::BackgroundKnowledge];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short code used in question ids and reports.
    pub fn code(self) -> &'static str {
        match self {
            Modality::Vision => "V",
            Modality::Text => "T",
            Modality::BackgroundKnowledge => "BK",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    Explanation,
    Activity,
    Scene,
    Mental,
    Hypothetical,
    Temporal,
    Role,
}

impl QuestionType {
    pub const ALL: [QuestionType; 7] = [
        QuestionType::Explanation,
        QuestionType::Activity,
        QuestionType::Scene,
        QuestionType::Mental,
        QuestionType::Hypothetical,
        QuestionType::Temporal,
        QuestionType::Role,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Explanation => "explanation",
            QuestionType::Activity => "activity",
            QuestionType::Scene => "scene",
            QuestionType::Mental => "mental",
            QuestionType::Hypothetical => "hypothetical",
            QuestionType::Temporal => "temporal",
            QuestionType::Role => "role",
        }
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub sample_id: String,
    pub image_id: String,
    pub question_text: String,
    pub answer_choices: Vec<String>,
    pub label_index: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale_text: Option<String>,
    pub question_type: QuestionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default)]
    pub object_tags: Vec<String>,
}

impl SampleRecord {
    pub fn correct_answer(&self) -> &str {
        &self.answer_choices[usize::from(self.label_index)]
    }

    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.answer_choices.len() != 4 {
            return Err((
                "answer_choices",
                format!("expected exactly 4 answer choices, found {}", self.answer_choices.len()),
            ));
        }
        if self.label_index > 3 {
            return Err(("label_index", format!("label {} is outside 0..=3", self.label_index)));
        }
        if self.question_text.trim().is_empty() {
            return Err(("question_text", "question text is empty".into()));
        }
        if self.sample_id.is_empty() {
            return Err(("sample_id", "sample id is empty".into()));
        }
        Ok(())
    }

    pub fn image_ref(&self) -> ImageRef {
        ImageRef { image_id: self.image_id.clone(), object_tags: self.object_tags.clone() }
    }
}

/// What an image-text scorer sees of an image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRef {
    pub image_id: String,
    pub object_tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub text: String,
    pub modality: Modality,
    pub source_sample: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KeywordSet {
    pub keywords: Vec<(String, f64)>,
}

impl KeywordSet {
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().map(|(t, _)| t.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    #[default]
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "line {}: {}: {}", self.line, field, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{} malformed line(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<LineError>),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StatementError {
    #[error("sample {0} has no caption")]
    AbsentCaption(String),
}

const OPTIONAL_FIELDS: &[&str] = &["rationale_text", "caption"];

fn parse_line(line: &str, lineno: usize) -> Result<SampleRecord, LineError> {
    let err = |field: Option<&str>, message: String| LineError {
        line: lineno,
        field: field.map(str::to_string),
        message,
    };
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| err(None, format!("invalid JSON: {e}")))?;
    let obj = value.as_object().ok_or_else(|| err(None, "expected a JSON object".into()))?;
    for key in OPTIONAL_FIELDS {
        if obj.get(*key).is_some_and(serde_json::Value::is_null) {
            return Err(err(Some(key), "optional fields must be omitted, not null".into()));
        }
    }
    let rec: SampleRecord = serde_json::from_value(value).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|f| !f.contains(' '))
            .map(str::to_string);
        LineError { line: lineno, field, message: msg }
    })?;
    rec.validate().map_err(|(field, message)| err(Some(field), message))?;
    Ok(rec)
}

/// Reads a JSONL corpus. Every malformed line is reported, tagged with its
/// 1-based line number; blank lines are skipped.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<SampleRecord>, CorpusError> {
    let CorpusFormat::Jsonl = format;
    let io = |source| CorpusError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line, i + 1) {
            Ok(rec) => records.push(rec),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(CorpusError::Invalid(errors))
    }
}

pub fn write_corpus<W: Write>(out: &mut W, records: &[SampleRecord]) -> std::io::Result<()> {
    for rec in records {
        serde_json::to_writer(&mut *out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct CaptionLine {
    image_id: String,
    caption: String,
}

/// Loads `{image_id, caption}` JSONL and fills captions missing from `records`.
pub fn apply_captions(records: &mut [SampleRecord], path: &Path) -> Result<usize, CorpusError> {
    let io = |source| CorpusError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut captions = HashMap::new();
    let mut errors = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CaptionLine>(&line) {
            Ok(c) => {
                captions.insert(c.image_id, c.caption);
            }
            Err(e) => errors.push(LineError { line: i + 1, field: None, message: e.to_string() }),
        }
    }
    if !errors.is_empty() {
        return Err(CorpusError::Invalid(errors));
    }
    let mut filled = 0;
    for rec in records.iter_mut().filter(|r| r.caption.is_none()) {
        if let Some(c) = captions.get(&rec.image_id) {
            rec.caption = Some(c.clone());
            filled += 1;
        }
    }
    Ok(filled)
}

pub fn build_visual_statement(rec: &SampleRecord) -> Result<Statement, StatementError> {
    let caption = rec
        .caption
        .as_deref()
        .filter(|c| !text::strip_terminal(c).is_empty())
        .ok_or_else(|| StatementError::AbsentCaption(rec.sample_id.clone()))?;
    Ok(Statement {
        text: text::as_sentence(caption),
        modality: Modality::Vision,
        source_sample: rec.sample_id.clone(),
    })
}

const WH_WORDS: &[&str] = &["why", "how", "what", "who", "where", "which", "when", "whom", "whose"];

fn join(tokens: &[String]) -> String {
    tokens.join(" ")
}

fn first_verb_from(tokens: &[String], start: usize) -> Option<usize> {
    (start..tokens.len()).find(|&i| lexicon::lookup_verb(&tokens[i]).is_some())
}

/// Subject span when no verb marks its end: determiners/possessives plus one head token.
fn short_subject_end(tokens: &[String], start: usize) -> usize {
    let mut i = start;
    while i < tokens.len() && lexicon::is_determiner(&tokens[i]) {
        i += 1;
    }
    (i + 1).min(tokens.len())
}

/// Turns the inverted clause after a wh-word into declarative word order.
/// `is person1 playing X` becomes `person1 plays X`.
fn declarative(rest: &[String]) -> String {
    let Some(aux) = rest.first().map(String::as_str) else {
        return String::new();
    };
    if lexicon::is_copula(aux) {
        if let Some(v) = first_verb_from(rest, 2) {
            let verb = &rest[v];
            if matches!(lexicon::lookup_verb(verb), Some((_, VerbForm::Gerund))) {
                let form = match aux {
                    "is" | "am" => VerbForm::Third,
                    "was" | "were" => VerbForm::Past,
                    _ => VerbForm::Base,
                };
                return format!(
                    "{} {} {}",
                    join(&rest[1..v]),
                    lexicon::inflect(verb, form),
                    join(&rest[v + 1..])
                );
            }
            return format!("{} {} {}", join(&rest[1..v]), aux, join(&rest[v..]));
        }
        let end = short_subject_end(rest, 1);
        return format!("{} {} {}", join(&rest[1..end]), aux, join(&rest[end..]));
    }
    if lexicon::is_do_aux(aux) {
        if let Some(v) = first_verb_from(rest, 2) {
            let form = match aux {
                "does" => VerbForm::Third,
                "did" => VerbForm::Past,
                _ => VerbForm::Base,
            };
            return format!(
                "{} {} {}",
                join(&rest[1..v]),
                lexicon::inflect(&rest[v], form),
                join(&rest[v + 1..])
            );
        }
        return join(&rest[1..]);
    }
    if lexicon::is_modal(aux) && rest.len() > 2 {
        let v = first_verb_from(rest, 2).unwrap_or_else(|| short_subject_end(rest, 1));
        return format!("{} {} {}", join(&rest[1..v]), aux, join(&rest[v..]));
    }
    join(rest)
}

/// `what/who/where/... aux X V` questions: the answer fills the wh-slot.
fn wh_fill(wh: &str, rest: &[String], answer: &str) -> String {
    let Some(aux) = rest.first().map(String::as_str) else {
        return answer.to_string();
    };
    if lexicon::is_auxiliary(aux) {
        // wh-word is the subject: "who is holding the cup" -> "<A> is holding the cup"
        if rest.len() > 1
            && !lexicon::is_do_aux(aux)
            && matches!(
                lexicon::lookup_verb(&rest[1]),
                Some((_, VerbForm::Gerund | VerbForm::Participle))
            )
        {
            return format!("{answer} {}", join(rest));
        }
        match first_verb_from(rest, 2) {
            Some(v) if wh == "what" && rest[v] == "doing" && v + 1 == rest.len() => {
                format!("{} {aux} {answer}", join(&rest[1..v]))
            }
            Some(v) if lexicon::is_do_aux(aux) => {
                let form = match aux {
                    "does" => VerbForm::Third,
                    "did" => VerbForm::Past,
                    _ => VerbForm::Base,
                };
                format!(
                    "{} {} {} {answer}",
                    join(&rest[1..v]),
                    lexicon::inflect(&rest[v], form),
                    join(&rest[v + 1..])
                )
            }
            Some(v) => format!("{} {aux} {} {answer}", join(&rest[1..v]), join(&rest[v..])),
            None => format!("{} {aux} {answer}", join(&rest[1..])),
        }
    } else if lexicon::is_finite_verb(aux) {
        format!("{answer} {}", join(rest))
    } else {
        format!("{} {answer}", join(rest))
    }
}

/// An answer that is already a clause about something the question names:
/// a short subject (a pronoun, or words taken from the question) followed by
/// an auxiliary or finite verb. Such an answer is the statement itself.
fn is_clausal_answer(answer: &[String], question: &[String]) -> bool {
    let Some(j) = answer.iter().position(|w| lexicon::is_auxiliary(w) || lexicon::is_finite_verb(w)) else {
        return false;
    };
    if j == 0 || j > 4 {
        return false;
    }
    let subject: Vec<&String> = answer[..j].iter().filter(|w| !lexicon::is_determiner(w)).collect();
    match subject.as_slice() {
        [] => false,
        [w] if text::is_pronoun(w) => true,
        ws => ws.iter().all(|w| question.contains(w)),
    }
}

/// Declarative statement from the question and its correct answer.
///
/// | question shape        | statement                      |
/// |-----------------------|--------------------------------|
/// | `why ...?`            | `<decl(Q)> because <A>.`       |
/// | `how ...?`            | `<decl(Q)> by <A>.`            |
/// | `what is X doing?`    | `<X> is <A>.`                  |
/// | `what/who/where is X V?` | `<X> is V <A>.`             |
/// | `what happened ...?`  | `<A> <rest after happen>.`     |
/// | clausal answer        | `<A>.`                         |
/// | other wh-question     | `<Q minus wh-word> <A>.`       |
/// | no wh-word            | `<Q> because <A>.`             |
pub fn build_textual_statement(rec: &SampleRecord) -> Statement {
    let q = text::words(&rec.question_text);
    let answer = text::lower_first(text::strip_terminal(rec.correct_answer()));
    let wh = q.first().map(String::as_str).unwrap_or_default();
    let rest = q.get(1..).unwrap_or_default();
    let answer_tokens = text::words(&answer);
    let happen = rest.iter().position(|w| matches!(lexicon::lookup_verb(w), Some((v, _)) if v.base == "happen"));
    let body = match wh {
        "why" => format!("{} because {answer}", declarative(rest)),
        "how" if matches!(rest.first().map(String::as_str), Some("many" | "much" | "old" | "long" | "far")) => {
            format!("{} {answer}", join(rest))
        }
        "what" if happen.is_some() => {
            let h = happen.unwrap_or_default();
            format!("{answer} {}", join(&rest[h + 1..]))
        }
        w if WH_WORDS.contains(&w) && is_clausal_answer(&answer_tokens, &q) => answer.clone(),
        "how" => format!("{} by {answer}", declarative(rest)),
        w if WH_WORDS.contains(&w) => wh_fill(w, rest, &answer),
        _ => format!("{} because {answer}", join(&q)),
    };
    Statement {
        text: text::as_sentence(&body),
        modality: Modality::Text,
        source_sample: rec.sample_id.clone(),
    }
}

pub const DEFAULT_KEYWORDS: usize = 3;

fn keyword_candidate(w: &str) -> bool {
    !text::is_stopword(w)
        && !text::is_person_tag(w)
        && !text::is_pronoun(w)
        && !lexicon::is_auxiliary(w)
        && !lexicon::is_preposition_word(w)
        && !w.chars().all(|c| c.is_ascii_digit())
        && !matches!(lexicon::lookup_verb(w), Some((_, f)) if f != VerbForm::Base)
}

/// Offline keyword scorer: `tf × (1 + 0.5·w)` where `w = (first + 1) / n` is the
/// relative position of the term's first occurrence among all `n` word tokens
/// (later first mention weighs more, favoring phrase heads), normalized so the
/// top term scores 1. Ties break lexicographically.
pub fn extract_keywords(statements: &[Statement], k: usize) -> KeywordSet {
    let tokens: Vec<String> = statements.iter().flat_map(|s| text::words(&s.text)).collect();
    if tokens.is_empty() || k == 0 {
        return KeywordSet::default();
    }
    let n = tokens.len() as f64;
    let mut stats: HashMap<&str, (usize, usize)> = HashMap::new();
    for (i, t) in tokens.iter().enumerate() {
        if keyword_candidate(t) {
            stats.entry(t.as_str()).or_insert((0, i)).0 += 1;
        }
    }
    let mut scored: Vec<(String, f64)> = stats
        .into_iter()
        .map(|(t, (tf, first))| {
            let w = (first as f64 + 1.0) / n;
            (t.to_string(), tf as f64 * (1.0 + 0.5 * w))
        })
        .collect();
    let max = scored.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    for (_, s) in &mut scored {
        *s /= max;
    }
    KeywordSet { keywords: scored }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(q: &str, a: &str, ty: QuestionType) -> SampleRecord {
        SampleRecord {
            sample_id: "s".into(),
            image_id: "img".into(),
            question_text: q.into(),
            answer_choices: vec![a.into(), "x".into(), "y".into(), "z".into()],
            label_index: 0,
            rationale_text: None,
            question_type: ty,
            caption: Some("a man plays a trombone on stage".into()),
            object_tags: vec![],
        }
    }

    #[test]
    fn visual_statement_normalizes_caption() {
        let mut r = record("Why?", "x", QuestionType::Explanation);
        assert_eq!(build_visual_statement(&r).unwrap().text, "A man plays a trombone on stage.");
        r.caption = Some("a dog sits  .".into());
        assert_eq!(build_visual_statement(&r).unwrap().text, "A dog sits.");
        r.caption = None;
        assert_eq!(build_visual_statement(&r), Err(StatementError::AbsentCaption("s".into())));
    }

    #[test]
    fn why_question_uses_because() {
        let r = record(
            "Why is person1 playing a trombone in front of everyone?",
            "he is performing a solo",
            QuestionType::Explanation,
        );
        assert_eq!(
            build_textual_statement(&r).text,
            "Person1 plays a trombone in front of everyone because he is performing a solo."
        );
    }

    #[test]
    fn what_template_keeps_progressive() {
        let r = record("What is person2 holding?", "a cup", QuestionType::Activity);
        assert_eq!(build_textual_statement(&r).text, "Person2 is holding a cup.");
        let r = record("What is person1 doing?", "Playing a trombone.", QuestionType::Activity);
        assert_eq!(build_textual_statement(&r).text, "Person1 is playing a trombone.");
    }

    #[test]
    fn subject_wh_and_do_support() {
        let r = record("Who is holding the cup?", "person3", QuestionType::Role);
        assert_eq!(build_textual_statement(&r).text, "Person3 is holding the cup.");
        let r = record("What does person1 want?", "some coffee", QuestionType::Mental);
        assert_eq!(build_textual_statement(&r).text, "Person1 wants some coffee.");
        let r = record("Where is person1 standing?", "on the stage", QuestionType::Scene);
        assert_eq!(build_textual_statement(&r).text, "Person1 is standing on the stage.");
    }

    #[test]
    fn clausal_answers_stand_alone() {
        let r = record("Where are person1 and person2?", "They are in a concert hall.", QuestionType::Scene);
        assert_eq!(build_textual_statement(&r).text, "They are in a concert hall.");
        let r = record("What will person2 do next?", "person2 will sing a song.", QuestionType::Hypothetical);
        assert_eq!(build_textual_statement(&r).text, "Person2 will sing a song.");
        let r = record("What would happen if person1 dropped the cup?", "The cup would break.", QuestionType::Hypothetical);
        assert_eq!(build_textual_statement(&r).text, "The cup would break if person1 dropped the cup.");
    }

    #[test]
    fn how_uses_by() {
        let r = record("How is person1 getting home?", "taking the bus", QuestionType::Activity);
        assert_eq!(build_textual_statement(&r).text, "Person1 gets home by taking the bus.");
    }

    #[test]
    fn declarative_question_falls_back_to_because() {
        let r = record("Person1 is angry.", "his car broke", QuestionType::Mental);
        assert_eq!(build_textual_statement(&r).text, "Person1 is angry because his car broke.");
    }

    #[test]
    fn keywords_stopwords_only_is_empty() {
        let st = Statement { text: "It is to the of.".into(), modality: Modality::Text, source_sample: "s".into() };
        assert!(extract_keywords(&[st], 3).is_empty());
        assert!(extract_keywords(&[], 3).is_empty());
    }

    #[test]
    fn keyword_position_weighting_by_hand() {
        // tokens: the red trombone the red trombone (n = 6)
        // red:      tf 2, first 1 -> 2 * (1 + 0.5 * 2/6) = 7/3
        // trombone: tf 2, first 2 -> 2 * (1 + 0.5 * 3/6) = 5/2
        let st = Statement {
            text: "The red trombone. The red trombone.".into(),
            modality: Modality::Vision,
            source_sample: "s".into(),
        };
        let top = extract_keywords(std::slice::from_ref(&st), 1);
        assert_eq!(top.keywords, vec![("trombone".to_string(), 1.0)]);
        let both = extract_keywords(&[st], 2);
        assert_eq!(both.keywords[1].0, "red");
        assert!((both.keywords[1].1 - (7.0 / 3.0) / 2.5).abs() < 1e-12);
    }
}
