//! Tokenization and surface-form helpers shared by every stage.
//!
//! All comparisons in the pipeline go through these functions so that the
//! parser, the scorers, and the filters agree on what a "token" is.

/// Lowercased word tokens. Internal apostrophes and hyphens are kept
/// (`person1's`, `t-shirt`); all other punctuation separates tokens.
pub fn words(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = s.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if (c == '\'' || c == '-')
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            cur.push(c);
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Embedded English stopword list. Subject pronouns are deliberately absent:
/// they head valid triplet subjects and are filtered from keywords separately.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "also", "am", "an", "and", "any", "are", "as",
    "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "her", "here", "hers", "him", "his", "how", "if",
    "in", "into", "is", "its", "just", "me", "more", "most", "my", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "onto", "or", "other", "our", "ours", "out", "over", "own",
    "same", "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "then", "there", "these", "this", "those", "through", "to", "too", "under", "until", "up",
    "us", "very", "was", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "would", "your", "yours",
];

/// Personal pronouns that may head a subject.
pub const PRONOUNS: &[&str] = &["he", "she", "it", "they", "we", "you", "i"];

pub fn is_stopword(w: &str) -> bool {
    STOPWORDS.binary_search(&w).is_ok()
}

pub fn is_pronoun(w: &str) -> bool {
    PRONOUNS.contains(&w)
}

/// `person1`, `person12`, ... : the placeholder tags VCR uses for people.
pub fn is_person_tag(w: &str) -> bool {
    w.strip_prefix("person")
        .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
}

/// Word tokens with stopwords removed.
pub fn content_tokens(s: &str) -> Vec<String> {
    words(s).into_iter().filter(|w| !is_stopword(w)).collect()
}

/// True when every token of `s` is a stopword (or there are none).
pub fn is_stopword_only(s: &str) -> bool {
    words(s).iter().all(|w| is_stopword(w))
}

/// Uppercases the first character.
pub fn sentence_case(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Lowercases the first character unless the first word is "I".
pub fn lower_first(s: &str) -> String {
    if s == "I" || s.starts_with("I ") || s.starts_with("I'") {
        return s.to_string();
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | ';' | ',' | ':')
}

/// Removes trailing whitespace and terminal punctuation, e.g. `"foo  . "` -> `"foo"`.
pub fn strip_terminal(s: &str) -> &str {
    s.trim_end_matches(|c: char| c.is_whitespace() || is_terminal(c))
        .trim_start()
}

/// Trims, strips any trailing punctuation run, and appends exactly one `mark`.
pub fn terminate(s: &str, mark: char) -> String {
    let body = strip_terminal(s);
    let mut out = String::with_capacity(body.len() + 1);
    out.push_str(body);
    out.push(mark);
    out
}

/// Sentence-cased, single terminal period.
pub fn as_sentence(s: &str) -> String {
    sentence_case(&terminate(&collapse_ws(s), '.'))
}

pub fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Knowledge-store concept key: lowercase, whitespace runs become `_`.
pub fn normalize_concept(s: &str) -> String {
    s.trim()
        .to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '_')
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// Inverse of [`normalize_concept`] for surface realization.
pub fn display_concept(s: &str) -> String {
    s.replace('_', " ")
}

/// Case- and punctuation-insensitive form used for duplicate detection.
pub fn normalize_for_compare(s: &str) -> String {
    words(s).join(" ")
}

/// Whole-word containment of `needle` in `haystack` (both tokenized).
pub fn contains_phrase(haystack: &str, needle: &str) -> bool {
    let hay = words(haystack);
    let nee = words(needle);
    if nee.is_empty() || nee.len() > hay.len() {
        return false;
    }
    hay.windows(nee.len()).any(|w| w == nee.as_slice())
}

/// FNV-1a over UTF-8 bytes (64-bit).
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopwords_sorted_for_binary_search() {
        let mut sorted = STOPWORDS.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted, STOPWORDS);
    }

    #[test]
    fn tokenizes_keeping_internal_marks() {
        assert_eq!(
            words("Person1's t-shirt, isn't it?"),
            vec!["person1's", "t-shirt", "isn't", "it"]
        );
        assert_eq!(words("  -- "), Vec::<String>::new());
    }

    #[test]
    fn terminate_collapses_punctuation_runs() {
        assert_eq!(terminate("a man  .", '.'), "a man.");
        assert_eq!(terminate("what?!", '?'), "what?");
        assert_eq!(as_sentence("a man plays"), "A man plays.");
    }

    #[test]
    fn person_tags() {
        assert!(is_person_tag("person1"));
        assert!(is_person_tag("person23"));
        assert!(!is_person_tag("person"));
        assert!(!is_person_tag("personal"));
    }

    #[test]
    fn concept_normalization_round_trip() {
        assert_eq!(normalize_concept(" Brass  Instrument "), "brass_instrument");
        assert_eq!(display_concept("brass_instrument"), "brass instrument");
    }

    #[test]
    fn phrase_containment_is_word_level() {
        assert!(contains_phrase("The boy is in front of people.", "in front of"));
        assert!(!contains_phrase("The boyish man.", "boy"));
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }
}
