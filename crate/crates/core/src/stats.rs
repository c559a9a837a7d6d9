//! Dataset report over a sub-question file.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Modality;
use crate::qagen::SubQuestion;
use crate::text;

/// Every `VAL_MODULUS`-th bucket of the sample-id hash is validation (10:1).
pub const VAL_MODULUS: u64 = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
}

/// Stable split label for a sample; all of a sample's questions share it.
pub fn split_of(sample_id: &str) -> Split {
    if text::fnv1a(sample_id.as_bytes()) % VAL_MODULUS == 0 {
        Split::Val
    } else {
        Split::Train
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub samples: usize,
    pub questions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub questions: usize,
    pub samples: usize,
    pub per_modality: BTreeMap<Modality, usize>,
    /// Mean whitespace-delimited words in the correct answer; absent when empty.
    pub avg_answer_words: Option<f64>,
    pub splits: BTreeMap<Split, SplitCounts>,
}

pub fn dataset_stats(questions: &[SubQuestion]) -> DatasetStats {
    let mut s = DatasetStats::default();
    for m in Modality::ALL {
        s.per_modality.insert(m, 0);
    }
    for sp in [Split::Train, Split::Val] {
        s.splits.insert(sp, SplitCounts::default());
    }
    let mut seen = std::collections::HashSet::new();
    let mut words = 0usize;
    for q in questions {
        s.questions += 1;
        *s.per_modality.entry(q.modality).or_default() += 1;
        words += q.choices.get(q.label_index).map_or(0, |a| a.split_whitespace().count());
        let split = s.splits.entry(split_of(&q.sample_id)).or_default();
        split.questions += 1;
        if seen.insert(q.sample_id.as_str()) {
            split.samples += 1;
            s.samples += 1;
        }
    }
    s.avg_answer_words = (s.questions > 0).then(|| words as f64 / s.questions as f64);
    s
}

impl DatasetStats {
    pub fn to_table(&self) -> String {
        let avg = self.avg_answer_words.map_or_else(|| "-".to_string(), |a| format!("{a:.2}"));
        let mut out = format!("questions            {}\nsamples              {}\n", self.questions, self.samples);
        for (m, n) in &self.per_modality {
            out.push_str(&format!("{:<20} {n}\n", format!("modality {}", m.code())));
        }
        out.push_str(&format!("avg answer words     {avg}\n"));
        for (sp, c) in &self.splits {
            let name = match sp {
                Split::Train => "train",
                Split::Val => "val",
            };
            out.push_str(&format!("{:<20} {} questions / {} samples\n", format!("split {name}"), c.questions, c.samples));
        }
        out
    }
}
