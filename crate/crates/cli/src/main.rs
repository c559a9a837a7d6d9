//! `mqag`: build the knowledge store, generate and filter sub-questions,
//! score predictions, run coaching passes, and host annotation.
//!
//! Exit status is 0 when the command finished without fatal errors. Dropped
//! samples and questions are reported in the manifest and are not fatal.

use std::collections::{BTreeMap, HashSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mqag_core::annotate::store::AnnotationStore;
use mqag_core::annotate::{annotation_metrics, AggregateOutcome};
use mqag_core::coach::{self, HttpModelClient, ModelClient, ScriptedClient};
use mqag_core::config::PipelineConfig;
use mqag_core::corpus::{self, CorpusFormat, SampleRecord};
use mqag_core::kb::{self, KnowledgeStore};
use mqag_core::metrics::{self, PredictionRecord};
use mqag_core::pipeline::{self, CandidateRecord, GenerateOptions, Pipeline};
use mqag_core::qagen::SubQuestion;
use mqag_core::scorers::{ProviderConfig, Providers};
use mqag_core::stats;

#[derive(Parser)]
#[command(name = "mqag", version, about = "Multimodal sub-question generation and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the binary knowledge store from a TSV edge list.
    IngestKb {
        /// subject, relation, object, weight per line
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate sub-questions for every sample in the corpus.
    Generate(GenerateArgs),
    /// Re-run distractor filtering over dumped candidate records.
    Filter {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions.
    Eval(EvalArgs),
    /// Probe a model with sub-questions and collect its failures.
    Coach(CoachArgs),
    /// Human verification of generated questions.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
    /// Dataset statistics for a sub-question file.
    Stats {
        #[arg(long)]
        questions: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides paths.output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_graph: bool,
    #[arg(long)]
    dump_ranking: bool,
    #[arg(long)]
    dump_candidates: bool,
    /// Also write seven-choice verification tasks.
    #[arg(long)]
    emit_tasks: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    predictions: PathBuf,
    /// Generated sub-questions; prediction question ids are checked against them.
    #[arg(long)]
    questions: Option<PathBuf>,
    /// Corpus used to look up question types (required with --by-type).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Write a per-question-type CSV here.
    #[arg(long, requires = "corpus")]
    by_type: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CoachArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    questions: PathBuf,
    /// JSONL of {question_id, choice_index}; replaces a live model.
    #[arg(long, conflicts_with = "endpoint")]
    script: Option<PathBuf>,
    /// Model endpoint taking {image_id, stem, choices}.
    #[arg(long, required_unless_present = "script")]
    endpoint: Option<String>,
    #[arg(long, default_value = "pass-1")]
    pass_id: String,
    /// Training pool output (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AnnotateCommand {
    /// Serve tasks over HTTP until interrupted.
    Serve {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Aggregate complete tasks into final questions and quality metrics.
    Aggregate {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "mqag=info,warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::IngestKb { input, out } => ingest(&input, &out),
        Command::Generate(args) => generate(args),
        Command::Filter { config, candidates, out } => refilter(&config, &candidates, &out),
        Command::Eval(args) => eval(args),
        Command::Coach(args) => coach_cmd(args),
        Command::Annotate(AnnotateCommand::Serve { tasks, data_dir, addr }) => serve(&tasks, &data_dir, addr),
        Command::Annotate(AnnotateCommand::Aggregate { tasks, data_dir, out }) => aggregate(&tasks, &data_dir, &out),
        Command::Stats { questions, json } => stats_cmd(&questions, json),
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn ingest(input: &Path, out: &Path) -> Result<()> {
    let (_, report) = kb::ingest(input, out)?;
    print_json(&report)
}

fn load_records(cfg: &PipelineConfig) -> Result<Vec<SampleRecord>> {
    let mut records = corpus::load_corpus(&cfg.corpus_path(), CorpusFormat::Jsonl)?;
    if let Some(captions) = cfg.captions_path() {
        let filled = corpus::apply_captions(&mut records, &captions)?;
        tracing::info!(filled, "captions applied");
    }
    Ok(records)
}

fn build_pipeline(cfg: PipelineConfig) -> Result<Pipeline> {
    cfg.check_inputs()?;
    let kb = Arc::new(KnowledgeStore::open(&cfg.kb_path())?);
    let providers = Providers::from_config(&cfg.providers, kb.clone(), &cfg.base_dir)?;
    Ok(Pipeline::new(cfg, providers, kb))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let cfg = PipelineConfig::load(&args.config)?;
    let records = load_records(&cfg)?;
    let out_dir = args.out.unwrap_or_else(|| cfg.output_dir());
    let pipeline = build_pipeline(cfg)?;
    let opts = GenerateOptions {
        dump_graph: args.dump_graph,
        dump_ranking: args.dump_ranking,
        dump_candidates: args.dump_candidates,
        emit_tasks: args.emit_tasks,
    };
    let out = pipeline.generate(&records, opts);
    let written = pipeline::write_outputs(&out, &out_dir, opts)
        .with_context(|| format!("writing outputs to {}", out_dir.display()))?;
    let m = &out.manifest;
    eprintln!(
        "{} samples in, {} emitted, {} dropped; {} questions ({} samples fully covered)",
        m.samples.input,
        m.samples.emitted,
        m.samples.input - m.samples.emitted,
        m.questions.emitted,
        m.questions.full_coverage_samples
    );
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn refilter(config: &Path, candidates: &Path, out: &Path) -> Result<()> {
    let pipeline = build_pipeline(PipelineConfig::load(config)?)?;
    let records: Vec<CandidateRecord> = pipeline::read_jsonl(candidates)?;
    let mut kept: Vec<SubQuestion> = Vec::new();
    let mut failed: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen = HashSet::new();
    for rec in &records {
        // several candidate records can share a question id; the first that filters wins
        if seen.contains(&rec.draft.question_id) {
            continue;
        }
        match pipeline.refilter(rec) {
            Ok(q) => {
                seen.insert(q.question_id.clone());
                kept.push(q);
            }
            Err(e) => *failed.entry(e.to_string()).or_default() += 1,
        }
    }
    pipeline::write_jsonl(out, &kept)?;
    eprintln!("{} candidate records, {} questions written", records.len(), kept.len());
    for (reason, n) in failed {
        eprintln!("  {n} x {reason}");
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let recs: Vec<PredictionRecord> = pipeline::read_jsonl(&args.predictions)?;
    let known = match &args.questions {
        Some(p) => {
            let qs: Vec<SubQuestion> = pipeline::read_jsonl(p)?;
            Some(qs.into_iter().map(|q| q.question_id).collect::<HashSet<_>>())
        }
        None => None,
    };
    let errors = metrics::validate_predictions(&recs, known.as_ref());
    if !errors.is_empty() {
        for e in errors.iter().take(20) {
            eprintln!("  {e}");
        }
        bail!("{} invalid prediction record(s)", errors.len());
    }
    let report = metrics::aggregate(&recs);
    if args.json {
        print_json(&report)?;
    } else {
        print!("{}", report.to_table());
    }
    if let (Some(path), Some(corpus_path)) = (&args.by_type, &args.corpus) {
        let types = corpus::load_corpus(corpus_path, CorpusFormat::Jsonl)?
            .into_iter()
            .map(|r| (r.sample_id, r.question_type))
            .collect();
        let table = metrics::by_question_type(&recs, &types)?;
        std::fs::write(path, metrics::by_type_csv(&table)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn coach_cmd(args: CoachArgs) -> Result<()> {
    let cfg = PipelineConfig::load(&args.config)?;
    let records = load_records(&cfg)?;
    let questions: Vec<SubQuestion> = pipeline::read_jsonl(&args.questions)?;
    let client: Arc<dyn ModelClient> = match (&args.script, &args.endpoint) {
        (Some(script), _) => Arc::new(
            ScriptedClient::from_jsonl(script).with_context(|| format!("reading {}", script.display()))?,
        ),
        (None, Some(endpoint)) => Arc::new(HttpModelClient::new(&ProviderConfig::http(endpoint.clone()))?),
        (None, None) => bail!("either --script or --endpoint is required"),
    };
    let (pool, report) = coach::coach_pass(
        &records,
        &questions,
        client,
        &coach::default_exclusions(),
        &args.pass_id,
        cfg.parallelism,
    );
    pipeline::write_jsonl(&args.out, pool.entries())?;
    print_json(&report)?;
    if !report.skipped_samples.is_empty() {
        bail!("{} sample(s) skipped after model failures", report.skipped_samples.len());
    }
    Ok(())
}

fn serve(tasks: &Path, data_dir: &Path, addr: SocketAddr) -> Result<()> {
    let store = Arc::new(AnnotationStore::open(tasks, data_dir)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(mqag_server::serve(store, addr)).with_context(|| format!("serving on {addr}"))
}

fn aggregate(tasks: &Path, data_dir: &Path, out: &Path) -> Result<()> {
    let store = AnnotationStore::open(tasks, data_dir)?;
    let outcomes = store.aggregate_complete();
    let finalized: Vec<_> = outcomes
        .iter()
        .filter_map(|o| match o {
            AggregateOutcome::Finalized(f) => Some(&f.question),
            AggregateOutcome::Rejected(_) => None,
        })
        .collect();
    pipeline::write_jsonl(out, finalized.iter().copied())?;
    let rejected: Vec<_> = outcomes
        .iter()
        .filter_map(|o| match o {
            AggregateOutcome::Rejected(r) => Some(r),
            AggregateOutcome::Finalized(_) => None,
        })
        .collect();
    let quality = annotation_metrics(&store.batches(), &store.generated_labels());
    print_json(&serde_json::json!({
        "complete_tasks": outcomes.len(),
        "finalized": finalized.len(),
        "rejected": rejected,
        "quality": quality,
    }))
}

fn stats_cmd(questions: &Path, json: bool) -> Result<()> {
    let qs: Vec<SubQuestion> = pipeline::read_jsonl(questions)?;
    let s = stats::dataset_stats(&qs);
    if json {
        print_json(&s)
    } else {
        print!("{}", s.to_table());
        Ok(())
    }
}
