//! Multimodal sub-question generation and consistency evaluation.
//!
//! The pipeline turns an image–question–answer record into three families of
//! multiple-choice sub-questions (vision, text, background knowledge):
//! statements are parsed into triplets, per-modality graphs are merged,
//! the most relevant triplet of each modality is turned into a question, and
//! distractors are generated from a knowledge store and filtered.

pub mod annotate;
pub mod coach;
pub mod config;
pub mod corpus;
pub mod distract;
pub mod filter;
pub mod graph;
pub mod kb;
pub mod lexicon;
pub mod metrics;
pub mod pipeline;
pub mod qagen;
pub mod scorers;
pub mod select;
pub mod stats;
pub mod svo;
pub mod text;
