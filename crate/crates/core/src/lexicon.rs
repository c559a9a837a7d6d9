//! Small closed-class lexicon: verbs with their inflections, prepositions,
//! determiners, and auxiliaries.

/// One verb with its inflected forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verb {
    pub base: &'static str,
    pub third: &'static str,
    pub gerund: &'static str,
    pub past: &'static str,
    pub participle: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbForm {
    Base,
    Third,
    Gerund,
    Past,
    Participle,
}

macro_rules! verbs {
    ($( ($b:literal, $t:literal, $g:literal, $p:literal, $pp:literal) ),* $(,)?) => {
        &[ $( Verb { base: $b, third: $t, gerund: $g, past: $p, participle: $pp } ),* ]
    };
}

pub const VERBS: &[Verb] = verbs![
    ("ask", "asks", "asking", "asked", "asked"),
    ("bake", "bakes", "baking", "baked", "baked"),
    ("carry", "carries", "carrying", "carried", "carried"),
    ("cheer", "cheers", "cheering", "cheered", "cheered"),
    ("clap", "claps", "clapping", "clapped", "clapped"),
    ("climb", "climbs", "climbing", "climbed", "climbed"),
    ("cook", "cooks", "cooking", "cooked", "cooked"),
    ("cross", "crosses", "crossing", "crossed", "crossed"),
    ("cry", "cries", "crying", "cried", "cried"),
    ("dance", "dances", "dancing", "danced", "danced"),
    ("drink", "drinks", "drinking", "drank", "drunk"),
    ("drive", "drives", "driving", "drove", "driven"),
    ("drop", "drops", "dropping", "dropped", "dropped"),
    ("eat", "eats", "eating", "ate", "eaten"),
    ("enjoy", "enjoys", "enjoying", "enjoyed", "enjoyed"),
    ("face", "faces", "facing", "faced", "faced"),
    ("feed", "feeds", "feeding", "fed", "fed"),
    ("fix", "fixes", "fixing", "fixed", "fixed"),
    ("follow", "follows", "following", "followed", "followed"),
    ("get", "gets", "getting", "got", "gotten"),
    ("give", "gives", "giving", "gave", "given"),
    ("go", "goes", "going", "went", "gone"),
    ("grab", "grabs", "grabbing", "grabbed", "grabbed"),
    ("greet", "greets", "greeting", "greeted", "greeted"),
    ("hear", "hears", "hearing", "heard", "heard"),
    ("help", "helps", "helping", "helped", "helped"),
    ("hit", "hits", "hitting", "hit", "hit"),
    ("hold", "holds", "holding", "held", "held"),
    ("hug", "hugs", "hugging", "hugged", "hugged"),
    ("kick", "kicks", "kicking", "kicked", "kicked"),
    ("kiss", "kisses", "kissing", "kissed", "kissed"),
    ("laugh", "laughs", "laughing", "laughed", "laughed"),
    ("lead", "leads", "leading", "led", "led"),
    ("lean", "leans", "leaning", "leaned", "leaned"),
    ("leave", "leaves", "leaving", "left", "left"),
    ("lie", "lies", "lying", "lay", "lain"),
    ("lift", "lifts", "lifting", "lifted", "lifted"),
    ("listen", "listens", "listening", "listened", "listened"),
    ("look", "looks", "looking", "looked", "looked"),
    ("make", "makes", "making", "made", "made"),
    ("meet", "meets", "meeting", "met", "met"),
    ("open", "opens", "opening", "opened", "opened"),
    ("order", "orders", "ordering", "ordered", "ordered"),
    ("paint", "paints", "painting", "painted", "painted"),
    ("perform", "performs", "performing", "performed", "performed"),
    ("pick", "picks", "picking", "picked", "picked"),
    ("play", "plays", "playing", "played", "played"),
    ("point", "points", "pointing", "pointed", "pointed"),
    ("pour", "pours", "pouring", "poured", "poured"),
    ("practice", "practices", "practicing", "practiced", "practiced"),
    ("pull", "pulls", "pulling", "pulled", "pulled"),
    ("push", "pushes", "pushing", "pushed", "pushed"),
    ("read", "reads", "reading", "read", "read"),
    ("ride", "rides", "riding", "rode", "ridden"),
    ("run", "runs", "running", "ran", "run"),
    ("say", "says", "saying", "said", "said"),
    ("see", "sees", "seeing", "saw", "seen"),
    ("sell", "sells", "selling", "sold", "sold"),
    ("serve", "serves", "serving", "served", "served"),
    ("shake", "shakes", "shaking", "shook", "shaken"),
    ("shout", "shouts", "shouting", "shouted", "shouted"),
    ("sing", "sings", "singing", "sang", "sung"),
    ("sit", "sits", "sitting", "sat", "sat"),
    ("sleep", "sleeps", "sleeping", "slept", "slept"),
    ("smile", "smiles", "smiling", "smiled", "smiled"),
    ("speak", "speaks", "speaking", "spoke", "spoken"),
    ("stand", "stands", "standing", "stood", "stood"),
    ("stare", "stares", "staring", "stared", "stared"),
    ("study", "studies", "studying", "studied", "studied"),
    ("swim", "swims", "swimming", "swam", "swum"),
    ("take", "takes", "taking", "took", "taken"),
    ("talk", "talks", "talking", "talked", "talked"),
    ("teach", "teaches", "teaching", "taught", "taught"),
    ("tell", "tells", "telling", "told", "told"),
    ("throw", "throws", "throwing", "threw", "thrown"),
    ("touch", "touches", "touching", "touched", "touched"),
    ("try", "tries", "trying", "tried", "tried"),
    ("type", "types", "typing", "typed", "typed"),
    ("use", "uses", "using", "used", "used"),
    ("wait", "waits", "waiting", "waited", "waited"),
    ("walk", "walks", "walking", "walked", "walked"),
    ("want", "wants", "wanting", "wanted", "wanted"),
    ("wash", "washes", "washing", "washed", "washed"),
    ("watch", "watches", "watching", "watched", "watched"),
    ("wave", "waves", "waving", "waved", "waved"),
    ("wear", "wears", "wearing", "wore", "worn"),
    ("win", "wins", "winning", "won", "won"),
    ("work", "works", "working", "worked", "worked"),
    ("write", "writes", "writing", "wrote", "written"),
    ("yell", "yells", "yelling", "yelled", "yelled"),
    ("dress", "dresses", "dressing", "dressed", "dressed"),
    ("celebrate", "celebrates", "celebrating", "celebrated", "celebrated"),
    ("applaud", "applauds", "applauding", "applauded", "applauded"),
    ("argue", "argues", "arguing", "argued", "argued"),
    ("arrive", "arrives", "arriving", "arrived", "arrived"),
    ("buy", "buys", "buying", "bought", "bought"),
    ("catch", "catches", "catching", "caught", "caught"),
    ("check", "checks", "checking", "checked", "checked"),
    ("chase", "chases", "chasing", "chased", "chased"),
    ("close", "closes", "closing", "closed", "closed"),
    ("examine", "examines", "examining", "examined", "examined"),
    ("fly", "flies", "flying", "flew", "flown"),
    ("hide", "hides", "hiding", "hid", "hidden"),
    ("jump", "jumps", "jumping", "jumped", "jumped"),
    ("knock", "knocks", "knocking", "knocked", "knocked"),
    ("prepare", "prepares", "preparing", "prepared", "prepared"),
    ("rest", "rests", "resting", "rested", "rested"),
    ("share", "shares", "sharing", "shared", "shared"),
    ("show", "shows", "showing", "showed", "shown"),
    ("sweep", "sweeps", "sweeping", "swept", "swept"),
    ("visit", "visits", "visiting", "visited", "visited"),
    ("need", "needs", "needing", "needed", "needed"),
    ("feel", "feels", "feeling", "felt", "felt"),
    ("think", "thinks", "thinking", "thought", "thought"),
    ("happen", "happens", "happening", "happened", "happened"),
    ("do", "does", "doing", "did", "done"),
    ("have", "has", "having", "had", "had"),
    ("cause", "causes", "causing", "caused", "caused"),
    ("desire", "desires", "desiring", "desired", "desired"),
    ("admire", "admires", "admiring", "admired", "admired"),
    ("tune", "tunes", "tuning", "tuned", "tuned"),
    ("finish", "finishes", "finishing", "finished", "finished"),
    ("pack", "packs", "packing", "packed", "packed"),
    ("break", "breaks", "breaking", "broke", "broken"),
    ("love", "loves", "loving", "loved", "loved"),
    ("like", "likes", "liking", "liked", "liked"),
    ("learn", "learns", "learning", "learned", "learned"),
    ("conduct", "conducts", "conducting", "conducted", "conducted"),
    ("strum", "strums", "strumming", "strummed", "strummed"),
    ("record", "records", "recording", "recorded", "recorded"),
];

/// Copular / progressive auxiliaries.
pub const COPULAS: &[&str] = &["is", "are", "was", "were", "am", "be", "been", "being"];
pub const MODALS: &[&str] = &["can", "could", "will", "would", "should", "may", "might", "must"];
pub const DO_AUX: &[&str] = &["do", "does", "did"];

pub const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "his", "her", "their", "its", "my",
    "your", "our", "some", "every", "each", "another",
];

/// Prepositions, multi-word phrases first so longest-match wins.
pub const PREPOSITIONS: &[&str] = &[
    "in front of",
    "on top of",
    "next to",
    "close to",
    "far from",
    "away from",
    "out of",
    "across from",
    "because of",
    "above",
    "across",
    "against",
    "along",
    "among",
    "around",
    "at",
    "behind",
    "below",
    "beneath",
    "beside",
    "between",
    "by",
    "for",
    "from",
    "in",
    "inside",
    "into",
    "near",
    "on",
    "onto",
    "outside",
    "over",
    "through",
    "to",
    "toward",
    "towards",
    "under",
    "underneath",
    "with",
];

pub const CONJUNCTIONS: &[&str] = &["and", "or", "but"];

/// Words that split one statement into separately parsed clauses.
pub const CLAUSE_JOINERS: &[&str] = &["because", "so", "if", "when", "while"];

pub fn lookup_verb(word: &str) -> Option<(&'static Verb, VerbForm)> {
    // Prefer the inflected reading: "read" is both base and past, "hit" too.
    VERBS.iter().find_map(|v| {
        if v.third == word {
            Some((v, VerbForm::Third))
        } else if v.gerund == word {
            Some((v, VerbForm::Gerund))
        } else if v.past == word {
            Some((v, VerbForm::Past))
        } else if v.participle == word {
            Some((v, VerbForm::Participle))
        } else if v.base == word {
            Some((v, VerbForm::Base))
        } else {
            None
        }
    })
}

pub fn verb_by_base(base: &str) -> Option<&'static Verb> {
    VERBS.iter().find(|v| v.base == base)
}

pub fn is_copula(w: &str) -> bool {
    COPULAS.contains(&w)
}

pub fn is_modal(w: &str) -> bool {
    MODALS.contains(&w)
}

pub fn is_do_aux(w: &str) -> bool {
    DO_AUX.contains(&w)
}

pub fn is_auxiliary(w: &str) -> bool {
    is_copula(w) || is_modal(w) || is_do_aux(w)
}

pub fn is_determiner(w: &str) -> bool {
    DETERMINERS.contains(&w)
}

/// Any token that can head a predicate: an auxiliary or an inflected verb.
/// Bare base forms count only after an auxiliary (they are too often nouns).
pub fn is_finite_verb(w: &str) -> bool {
    is_copula(w)
        || is_modal(w)
        || matches!(
            lookup_verb(w),
            Some((_, VerbForm::Third | VerbForm::Past))
        )
}

/// Longest preposition phrase starting at `tokens[i]`, returned as token count.
pub fn preposition_at(tokens: &[String], i: usize) -> Option<usize> {
    PREPOSITIONS.iter().find_map(|p| {
        let parts: Vec<&str> = p.split(' ').collect();
        let end = i + parts.len();
        (end <= tokens.len() && tokens[i..end].iter().zip(&parts).all(|(t, p)| t == p))
            .then_some(parts.len())
    })
}

pub fn is_preposition_phrase(s: &str) -> bool {
    PREPOSITIONS.contains(&s)
}

/// Words that belong to some preposition phrase (`front` from `in front of`).
pub fn is_preposition_word(w: &str) -> bool {
    PREPOSITIONS.iter().any(|p| p.split(' ').any(|part| part == w))
}

/// "plays" -> "playing"; leaves unknown words untouched.
pub fn to_gerund(word: &str) -> String {
    match lookup_verb(word) {
        Some((v, _)) => v.gerund.to_string(),
        None => word.to_string(),
    }
}

/// Reinflects `base` (or any form of it) into `form`.
pub fn inflect(word: &str, form: VerbForm) -> String {
    match lookup_verb(word) {
        Some((v, _)) => match form {
            VerbForm::Base => v.base,
            VerbForm::Third => v.third,
            VerbForm::Gerund => v.gerund,
            VerbForm::Past => v.past,
            VerbForm::Participle => v.participle,
        }
        .to_string(),
        None => word.to_string(),
    }
}

/// Plural-looking noun phrase; decides `is` versus `are` during realization.
const IRREGULAR_PLURALS: &[(&str, &str)] =
    &[("man", "men"), ("woman", "women"), ("child", "children"), ("person", "people"), ("foot", "feet")];

/// Singular form of a plural noun; other words come back unchanged.
/// `-ses` is read as `-se` plus `s` (cases, houses), so "buses" comes out wrong.
pub fn singularize(word: &str) -> String {
    if let Some((s, _)) = IRREGULAR_PLURALS.iter().find(|(_, p)| *p == word) {
        return s.to_string();
    }
    if word == "people" || !looks_plural(word) {
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ies") {
        return format!("{stem}y");
    }
    for suffix in ["sses", "shes", "ches", "xes"] {
        if word.ends_with(suffix) {
            return word[..word.len() - 2].to_string();
        }
    }
    word[..word.len() - 1].to_string()
}

/// Plural of the last word of `phrase`.
pub fn pluralize(phrase: &str) -> String {
    let (head, last) = match phrase.rsplit_once(' ') {
        Some((h, l)) => (format!("{h} "), l),
        None => (String::new(), phrase),
    };
    let plural = if let Some((_, p)) = IRREGULAR_PLURALS.iter().find(|(s, _)| *s == last) {
        p.to_string()
    } else if last.ends_with('y') && !last.ends_with("ay") && !last.ends_with("ey") && !last.ends_with("oy") {
        format!("{}ies", &last[..last.len() - 1])
    } else if ["s", "sh", "ch", "x"].iter().any(|s| last.ends_with(s)) {
        format!("{last}es")
    } else {
        format!("{last}s")
    };
    format!("{head}{plural}")
}

pub fn looks_plural(phrase: &str) -> bool {
    const PLURALS: &[&str] = &["people", "men", "women", "children", "they", "we", "you", "crowd"];
    let ws = crate::text::words(phrase);
    if ws.iter().any(|w| w == "and") {
        return true;
    }
    match ws.last() {
        Some(last) if PLURALS.contains(&last.as_str()) => last != "crowd",
        Some(last) => {
            last.len() > 3
                && last.ends_with('s')
                && !last.ends_with("ss")
                && !last.ends_with("us")
                && !last.ends_with("is")
                && !last.ends_with("'s")
        }
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verb_forms_resolve() {
        assert_eq!(lookup_verb("plays").map(|(v, f)| (v.base, f)), Some(("play", VerbForm::Third)));
        assert_eq!(to_gerund("plays"), "playing");
        assert_eq!(inflect("holding", VerbForm::Third), "holds");
        assert!(is_finite_verb("plays"));
        assert!(!is_finite_verb("play"));
        assert!(is_finite_verb("is"));
    }

    #[test]
    fn verb_table_has_unique_bases() {
        let mut bases: Vec<_> = VERBS.iter().map(|v| v.base).collect();
        bases.sort_unstable();
        let n = bases.len();
        bases.dedup();
        assert_eq!(n, bases.len());
    }

    #[test]
    fn multiword_preposition_longest_match() {
        let toks: Vec<String> = ["in", "front", "of", "people"].iter().map(|s| s.to_string()).collect();
        assert_eq!(preposition_at(&toks, 0), Some(3));
        assert_eq!(preposition_at(&toks, 3), None);
    }

    #[test]
    fn number_round_trip() {
        for (s, p) in [("woman", "women"), ("drum", "drums"), ("bench", "benches"), ("story", "stories")] {
            assert_eq!(pluralize(s), p);
            assert_eq!(singularize(p), s);
        }
        assert_eq!(pluralize("concert hall"), "concert halls");
        assert_eq!(singularize("bass"), "bass");
    }

    #[test]
    fn plurality_heuristic() {
        assert!(looks_plural("people"));
        assert!(looks_plural("person1 and person2"));
        assert!(looks_plural("chairs"));
        assert!(!looks_plural("boy"));
        assert!(!looks_plural("bus"));
        assert!(!looks_plural("glass"));
    }
}
