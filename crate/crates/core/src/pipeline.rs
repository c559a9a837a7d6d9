//! End-to-end generation: one corpus record in, up to three sub-questions out.
//!
//! Per sample: statements, keywords, knowledge retrieval, parsing, domain
//! graphs, merge, ranking, selection, question templates, distractors and
//! filtering. Samples run on a worker pool; results keep input order so
//! output files are byte-identical across runs with the same seed.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::annotate::VerificationTask;
use crate::config::PipelineConfig;
use crate::corpus::{self, ImageRef, Modality, SampleRecord, Statement, StatementError};
use crate::distract::{self, DistractContext, DistractError, DistractorCandidate};
use crate::filter::{self, CompareAgainst, FilterConfig, FilterError, FilterProviders, QuestionDraft};
use crate::graph::{self, DomainGraph, MultimodalGraph, NodeScorer};
use crate::kb::{KnowledgeStore, RelationPool};
use crate::qagen::{self, SubQuestion, TripletRef};
use crate::scorers::{ProviderError, Providers};
use crate::select::{self, RelevanceScore};
use crate::lexicon;
use crate::svo::{self, Slot, Triplet};
use crate::text;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Why a whole sample produced nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleDrop {
    AbsentCaption,
    NoTriplets,
    NoQuestions,
    ProviderError,
}

/// Why one modality of a sample produced no question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionDrop {
    NoTriplet,
    NoApplicableSlot,
    EmptyCandidateSet,
    InsufficientDistractors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRecord<R> {
    pub id: String,
    pub reason: R,
    pub detail: String,
}

/// Everything the filter step needs, so `filter` can re-run it offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub draft: QuestionDraft,
    pub reference: String,
    pub image: ImageRef,
    pub relevance: Relevance,
    pub candidates: Vec<DistractorCandidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Relevance {
    pub text_term: f64,
    pub image_term: f64,
    pub total: f64,
    /// Position among same-modality triplets; 0 is the top pick.
    pub rank: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SampleResult {
    pub sample_id: String,
    pub dropped: Option<DropRecord<SampleDrop>>,
    pub questions: Vec<SubQuestion>,
    pub question_drops: Vec<DropRecord<QuestionDrop>>,
    pub tasks: Vec<VerificationTask>,
    pub tasks_skipped: usize,
    pub graph: Option<MultimodalGraph>,
    pub ranking: Vec<RelevanceScore>,
    pub candidates: Vec<CandidateRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerateOptions {
    pub dump_graph: bool,
    pub dump_ranking: bool,
    pub dump_candidates: bool,
    pub emit_tasks: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub input: usize,
    pub emitted: usize,
    pub dropped: BTreeMap<SampleDrop, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuestionCounts {
    pub emitted: usize,
    pub per_modality: BTreeMap<Modality, usize>,
    pub dropped: BTreeMap<QuestionDrop, usize>,
    /// Samples with at least one question in every modality.
    pub full_coverage_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub providers: BTreeMap<String, String>,
    pub samples: SampleCounts,
    pub questions: QuestionCounts,
    pub tasks_emitted: usize,
    pub tasks_skipped: usize,
    pub sample_drops: Vec<DropRecord<SampleDrop>>,
    pub question_drops: Vec<DropRecord<QuestionDrop>>,
}

impl Manifest {
    /// Emitted plus dropped samples; always equals the input count.
    pub fn accounted_samples(&self) -> usize {
        self.samples.emitted + self.samples.dropped.values().sum::<usize>()
    }
}

pub struct GenerateOutput {
    pub results: Vec<SampleResult>,
    pub manifest: Manifest,
}

impl GenerateOutput {
    pub fn questions(&self) -> impl Iterator<Item = &SubQuestion> {
        self.results.iter().flat_map(|r| r.questions.iter())
    }
}

pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub providers: Providers,
    pub kb: Arc<KnowledgeStore>,
    bk_pool: RelationPool,
    distractor_pool: RelationPool,
}

fn sample_drop(rec: &SampleRecord, reason: SampleDrop, detail: impl Into<String>) -> SampleResult {
    SampleResult {
        sample_id: rec.sample_id.clone(),
        dropped: Some(DropRecord { id: rec.sample_id.clone(), reason, detail: detail.into() }),
        ..Default::default()
    }
}

/// Filters one candidate record into a question with scores in its provenance.
pub fn assemble(
    rec: &CandidateRecord,
    cfg: &FilterConfig,
    p: FilterProviders<'_>,
) -> Result<SubQuestion, FilterError> {
    let (mut q, outcome) = filter::filter_and_assemble(&rec.candidates, &rec.draft, &rec.reference, &rec.image, cfg, p)?;
    let distractors: Vec<_> = outcome
        .kept
        .iter()
        .map(|c| {
            json!({
                "text": c.text,
                "replacement": c.replacement_concept,
                "source": c.source,
                "retrieval": c.retrieval,
                "sim": c.sim_to_answer,
                "image_rel": c.image_rel,
            })
        })
        .collect();
    q.provenance = json!({
        "relevance": rec.relevance,
        "candidates": rec.candidates.len(),
        "filter": {
            "dropped_grammar": outcome.dropped_grammar,
            "dropped_similarity": outcome.dropped_similarity,
            "dropped_rank": outcome.dropped_rank,
        },
        "distractors": distractors,
    });
    Ok(q)
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, providers: Providers, kb: Arc<KnowledgeStore>) -> Self {
        Pipeline {
            cfg,
            providers,
            kb,
            bk_pool: RelationPool::background_knowledge(),
            distractor_pool: RelationPool::distractor(),
        }
    }

    /// Offline providers over `kb`.
    pub fn offline(cfg: PipelineConfig, kb: Arc<KnowledgeStore>) -> Self {
        let providers = Providers::offline(kb.clone());
        Self::new(cfg, providers, kb)
    }

    fn filter_providers(&self) -> FilterProviders<'_> {
        FilterProviders {
            grammar: self.providers.grammar.as_ref(),
            encoder: self.providers.encoder.as_ref(),
            image_text: self.providers.image_text.as_ref(),
        }
    }

    /// Knowledge-store triplets around the sample's keywords.
    pub fn background_triplets(&self, statements: &[Statement], sample_id: &str) -> Vec<Triplet> {
        let g = &self.cfg.generation;
        let keywords = corpus::extract_keywords(statements, g.keywords);
        let mut out: Vec<Triplet> = Vec::new();
        for term in keywords.terms() {
            for e in self.kb.neighbors(&text::normalize_concept(term), &self.bk_pool, g.bk_neighbors) {
                let subject = text::display_concept(&e.subject);
                let predicate = svo::agree(e.relation.phrase(), lexicon::looks_plural(&subject));
                let t = Triplet::new(
                    subject,
                    predicate,
                    text::display_concept(&e.object),
                    Modality::BackgroundKnowledge,
                    sample_id,
                );
                if t.is_valid() && !out.iter().any(|o| o.key() == t.key()) {
                    out.push(t);
                }
            }
        }
        out
    }

    fn candidate_record(
        &self,
        rec: &SampleRecord,
        textual: &Statement,
        image: &ImageRef,
        scored: &RelevanceScore,
        rank: usize,
        slot: Slot,
    ) -> Result<Result<CandidateRecord, DropRecord<QuestionDrop>>, ProviderError> {
        let t = &scored.triplet;
        let qid = qagen::question_id(&rec.sample_id, t.modality);
        let budget = self.cfg.generation.distractor_budget;
        let drop = |reason, detail: String| Ok(Err(DropRecord { id: qid.clone(), reason, detail }));
        let (stem, correct) = qagen::make_question(t, slot);
        let ctx = DistractContext {
            kb: &self.kb,
            pool: &self.distractor_pool,
            mask: self.providers.mask.as_ref(),
            realizer: self.providers.realizer.as_ref(),
        };
        let candidates = match distract::gen_candidates(t, slot, &correct, budget, ctx) {
            Ok(c) => c,
            Err(DistractError::Provider(e)) => return Err(e),
            Err(e) => return drop(QuestionDrop::EmptyCandidateSet, e.to_string()),
        };
        let reference = match self.cfg.filter.compare_against {
            CompareAgainst::TextualStatement => textual.text.clone(),
            CompareAgainst::CorrectAnswer => correct.clone(),
        };
        Ok(Ok(CandidateRecord {
            draft: QuestionDraft {
                question_id: qid.clone(),
                sample_id: rec.sample_id.clone(),
                image_id: rec.image_id.clone(),
                modality: t.modality,
                stem,
                correct,
                asked_slot: slot,
                source_triplet: TripletRef::from(t),
            },
            reference,
            image: image.clone(),
            relevance: Relevance { text_term: scored.text_term, image_term: scored.image_term, total: scored.total, rank },
            candidates,
        }))
    }

    /// Filter settings for one question: the shuffle seed is per question.
    pub fn question_filter_config(&self, question_id: &str) -> FilterConfig {
        FilterConfig {
            shuffle_seed: qagen::question_seed(self.cfg.seed ^ self.cfg.filter.shuffle_seed, "shuffle", question_id),
            ..self.cfg.filter
        }
    }

    /// Filters a candidate record exactly as generation does.
    pub fn refilter(&self, rec: &CandidateRecord) -> Result<SubQuestion, FilterError> {
        assemble(rec, &self.question_filter_config(&rec.draft.question_id), self.filter_providers())
    }

    fn verification_task(&self, rec: &CandidateRecord) -> Option<VerificationTask> {
        let n = self.cfg.generation.task_distractors;
        let cfg = FilterConfig { final_count: n, ..self.question_filter_config(&rec.draft.question_id) };
        let outcome =
            filter::filter_distractors(&rec.candidates, &rec.draft.correct, &rec.reference, &rec.image, &cfg, self.filter_providers())
                .ok()?;
        let texts: Vec<String> = outcome.kept.into_iter().map(|c| c.text).collect();
        let seed = qagen::question_seed(self.cfg.seed, "task", &rec.draft.question_id);
        let (choices, label) = filter::shuffle_choices(&rec.draft.correct, &texts, seed);
        let d = &rec.draft;
        let task = VerificationTask {
            task_id: d.question_id.clone(),
            question_id: d.question_id.clone(),
            sample_id: d.sample_id.clone(),
            image_id: d.image_id.clone(),
            modality: d.modality,
            asked_slot: d.asked_slot,
            source_triplet: d.source_triplet.clone(),
            stem: d.stem.clone(),
            choices,
            generated_label: label as u8,
        };
        task.validate().ok().map(|_| task)
    }

    /// Runs one sample through every stage.
    pub fn process_sample(&self, rec: &SampleRecord, opts: GenerateOptions) -> SampleResult {
        match self.try_process(rec, opts) {
            Ok(r) => r,
            Err(e) => sample_drop(rec, SampleDrop::ProviderError, e.to_string()),
        }
    }

    fn try_process(&self, rec: &SampleRecord, opts: GenerateOptions) -> Result<SampleResult, ProviderError> {
        let visual = match corpus::build_visual_statement(rec) {
            Ok(s) => s,
            Err(e @ StatementError::AbsentCaption(_)) => return Ok(sample_drop(rec, SampleDrop::AbsentCaption, e.to_string())),
        };
        let textual = corpus::build_textual_statement(rec);
        let image = rec.image_ref();
        let bk = self.background_triplets(&[visual.clone(), textual.clone()], &rec.sample_id);
        let parser = self.providers.parser.as_ref();
        let graphs: Vec<DomainGraph> = vec![
            graph::build_domain_graph(&parser.parse(&visual)?, Modality::Vision),
            graph::build_domain_graph(&parser.parse(&textual)?, Modality::Text),
            graph::build_domain_graph(&bk, Modality::BackgroundKnowledge),
        ];
        if graphs.iter().all(|g| g.edges.is_empty()) {
            return Ok(sample_drop(rec, SampleDrop::NoTriplets, "no statement yielded a triplet"));
        }
        let scorer = NodeScorer { encoder: self.providers.encoder.as_ref(), kb: &self.kb };
        let merged = graph::merge(&graphs, &self.cfg.merge, scorer)?;
        let ranked = select::rank_triplets(
            &merged,
            &textual,
            &image,
            self.providers.encoder.as_ref(),
            self.providers.image_text.as_ref(),
        )?;
        let picks = select::pick_per_modality(&ranked);

        let mut out = SampleResult { sample_id: rec.sample_id.clone(), ..Default::default() };
        let depth = self.cfg.generation.fallback_depth;
        for m in Modality::ALL {
            let qid = qagen::question_id(&rec.sample_id, m);
            let Some(pick) = picks.get(&m) else {
                out.question_drops.push(DropRecord { id: qid, reason: QuestionDrop::NoTriplet, detail: String::new() });
                continue;
            };
            // The pick first, then the next-ranked triplets of the same
            // modality when a later stage cannot produce a question. Within
            // a triplet, slots are tried in seeded order.
            let mut attempts = vec![pick];
            attempts.extend(
                select::ranked_for_modality(&ranked, m)
                    .filter(|r| r.triplet.key() != pick.triplet.key() && !picks.values().any(|p| p.triplet.key() == r.triplet.key()))
                    .take(depth),
            );
            let mut first_drop = None;
            let mut done = false;
            'attempts: for (rank, scored) in attempts.into_iter().enumerate() {
                let slots = qagen::slot_order(&scored.triplet, qagen::question_seed(self.cfg.seed, "slot", &qid));
                if slots.is_empty() {
                    let detail = format!("no template fits {}", scored.triplet);
                    first_drop.get_or_insert(DropRecord { id: qid.clone(), reason: QuestionDrop::NoApplicableSlot, detail });
                }
                for slot in slots {
                    let cand = match self.candidate_record(rec, &textual, &image, scored, rank, slot)? {
                        Ok(c) => c,
                        Err(d) => {
                            first_drop.get_or_insert(d);
                            continue;
                        }
                    };
                    let result = self.refilter(&cand);
                    if opts.dump_candidates {
                        out.candidates.push(cand.clone());
                    }
                    match result {
                        Ok(q) => {
                            if opts.emit_tasks {
                                match self.verification_task(&cand) {
                                    Some(t) => out.tasks.push(t),
                                    None => out.tasks_skipped += 1,
                                }
                            }
                            out.questions.push(q);
                            done = true;
                            break 'attempts;
                        }
                        Err(FilterError::Provider(e)) => return Err(e),
                        Err(e) => {
                            let reason = QuestionDrop::InsufficientDistractors;
                            first_drop.get_or_insert(DropRecord { id: qid.clone(), reason, detail: e.to_string() });
                        }
                    }
                }
            }
            if !done {
                if let Some(d) = first_drop {
                    out.question_drops.push(d);
                }
            }
        }
        if out.questions.is_empty() {
            let detail = out.question_drops.iter().map(|d| format!("{:?}", d.reason)).collect::<Vec<_>>().join(",");
            let mut dropped = sample_drop(rec, SampleDrop::NoQuestions, detail);
            dropped.question_drops = out.question_drops;
            return Ok(dropped);
        }
        if opts.dump_graph {
            out.graph = Some(merged);
        }
        if opts.dump_ranking {
            out.ranking = ranked;
        }
        Ok(out)
    }

    /// Runs every record on a pool of `cfg.parallelism` workers.
    pub fn generate(&self, records: &[SampleRecord], opts: GenerateOptions) -> GenerateOutput {
        let run = || records.par_iter().map(|r| self.process_sample(r, opts)).collect::<Vec<_>>();
        let results = match rayon::ThreadPoolBuilder::new().num_threads(self.cfg.parallelism).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        };
        let manifest = self.manifest(&results, records.len());
        GenerateOutput { results, manifest }
    }

    fn manifest(&self, results: &[SampleResult], input: usize) -> Manifest {
        let mut samples = SampleCounts { input, ..Default::default() };
        let mut questions = QuestionCounts::default();
        for m in Modality::ALL {
            questions.per_modality.insert(m, 0);
        }
        let (mut sample_drops, mut question_drops) = (Vec::new(), Vec::new());
        let (mut tasks_emitted, mut tasks_skipped) = (0, 0);
        for r in results {
            match &r.dropped {
                Some(d) => {
                    if d.reason == SampleDrop::ProviderError {
                        tracing::warn!(sample = %d.id, error = %d.detail, "provider failure, sample dropped");
                    }
                    *samples.dropped.entry(d.reason).or_default() += 1;
                    sample_drops.push(d.clone());
                }
                None => samples.emitted += 1,
            }
            for q in &r.questions {
                questions.emitted += 1;
                *questions.per_modality.entry(q.modality).or_default() += 1;
            }
            if Modality::ALL.iter().all(|m| r.questions.iter().any(|q| q.modality == *m)) {
                questions.full_coverage_samples += 1;
            }
            for d in &r.question_drops {
                *questions.dropped.entry(d.reason).or_default() += 1;
                question_drops.push(d.clone());
            }
            tasks_emitted += r.tasks.len();
            tasks_skipped += r.tasks_skipped;
        }
        Manifest {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: self.cfg.config_hash(),
            seed: self.cfg.seed,
            providers: self.providers.describe().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            samples,
            questions,
            tasks_emitted,
            tasks_skipped,
            sample_drops,
            question_drops,
        }
    }
}

pub const QUESTIONS_FILE: &str = "subquestions.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const GRAPHS_FILE: &str = "graphs.jsonl";
pub const RANKING_FILE: &str = "ranking.jsonl";
pub const CANDIDATES_FILE: &str = "candidates.jsonl";
pub const TASKS_FILE: &str = "tasks.jsonl";

/// Writes each item as one JSON line.
pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes the question file, the manifest, and whichever dumps were requested.
/// Returns the paths written.
pub fn write_outputs(out: &GenerateOutput, dir: &Path, opts: GenerateOptions) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join(QUESTIONS_FILE);
    write_jsonl(&path, out.questions())?;
    written.push(path);

    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&out.manifest)? + "\n")?;
    written.push(path);

    if opts.dump_graph {
        let graphs: Vec<_> = out
            .results
            .iter()
            .filter_map(|r| r.graph.as_ref().map(|g| json!({ "sample_id": r.sample_id, "graph": g })))
            .collect();
        let path = dir.join(GRAPHS_FILE);
        write_jsonl(&path, &graphs)?;
        written.push(path);
    }
    if opts.dump_ranking {
        let rows: Vec<_> = out
            .results
            .iter()
            .flat_map(|r| r.ranking.iter().map(move |s| json!({ "sample_id": r.sample_id, "score": s })))
            .collect();
        let path = dir.join(RANKING_FILE);
        write_jsonl(&path, &rows)?;
        written.push(path);
    }
    if opts.dump_candidates {
        let path = dir.join(CANDIDATES_FILE);
        write_jsonl(&path, out.results.iter().flat_map(|r| r.candidates.iter()))?;
        written.push(path);
    }
    if opts.emit_tasks {
        let path = dir.join(TASKS_FILE);
        write_jsonl(&path, out.results.iter().flat_map(|r| r.tasks.iter()))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a JSONL file, reporting the first malformed line.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> io::Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1))
        })?;
        out.push(v);
    }
    Ok(out)
}
