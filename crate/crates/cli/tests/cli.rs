use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mqag_core::annotate::store::AnnotationStore;
use mqag_core::annotate::{Annotation, VerificationTask};
use mqag_core::pipeline::read_jsonl;
use mqag_core::qagen::SubQuestion;

fn mini(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini").join(file)
}

fn mqag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqag")).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = mqag(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A scratch copy of the mini setup with its knowledge store built.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["config.toml", "corpus.jsonl"] {
        std::fs::copy(mini(f), dir.path().join(f)).unwrap();
    }
    let report = ok(&["ingest-kb", "--input", s(&mini("conceptnet_slice.tsv")), "--out", s(&dir.path().join("kb.bin"))]);
    assert!(report.contains("\"edges_in_store\""), "{report}");
    dir
}

#[test]
fn generate_is_byte_identical_and_refilters_to_the_same_questions() {
    let dir = workspace();
    let cfg = dir.path().join("config.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["generate", "--config", s(&cfg), "--out", s(&a), "--dump-candidates", "--dump-graph", "--dump-ranking"]);
    ok(&["generate", "--config", s(&cfg), "--out", s(&b), "--dump-candidates", "--dump-graph", "--dump-ranking"]);
    for f in ["subquestions.jsonl", "manifest.json", "candidates.jsonl", "graphs.jsonl", "ranking.jsonl"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let re = dir.path().join("re.jsonl");
    ok(&["filter", "--config", s(&cfg), "--candidates", s(&a.join("candidates.jsonl")), "--out", s(&re)]);
    assert_eq!(std::fs::read(&re).unwrap(), std::fs::read(a.join("subquestions.jsonl")).unwrap());

    let table = ok(&["stats", "--questions", s(&a.join("subquestions.jsonl"))]);
    assert!(table.contains("questions            56"), "{table}");
    let json: serde_json::Value =
        serde_json::from_str(&ok(&["stats", "--questions", s(&a.join("subquestions.jsonl")), "--json"])).unwrap();
    assert_eq!(json["questions"], 56);
}

#[test]
fn fatal_errors_exit_non_zero() {
    let dir = workspace();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = 1\n[paths]\ncorpus = \"corpus.jsonl\"\n").unwrap();
    let out = mqag(&["generate", "--config", s(&bad)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let text = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    let missing = dir.path().join("missing.toml");
    std::fs::write(&missing, text.replace("kb.bin", "nope.bin")).unwrap();
    let out = mqag(&["generate", "--config", s(&missing)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.bin"));

    let out = mqag(&["ingest-kb", "--input", s(&dir.path().join("absent.tsv")), "--out", s(&dir.path().join("x.bin"))]);
    assert!(!out.status.success());
}

#[test]
fn eval_reports_metrics_and_rejects_bad_records() {
    let dir = workspace();
    let cfg = dir.path().join("config.toml");
    let out_dir = dir.path().join("out");
    ok(&["generate", "--config", s(&cfg), "--out", s(&out_dir)]);
    let qs: Vec<SubQuestion> = read_jsonl(&out_dir.join("subquestions.jsonl")).unwrap();

    // the model gets every sub-question right and the main question right on even samples
    let samples: BTreeSet<&str> = qs.iter().map(|q| q.sample_id.as_str()).collect();
    let mut lines = String::new();
    for (i, sid) in samples.iter().enumerate() {
        let subs: Vec<_> = qs
            .iter()
            .filter(|q| q.sample_id == *sid)
            .map(|q| serde_json::json!({ "question_id": q.question_id, "modality": q.modality, "pred": q.label_index, "label": q.label_index }))
            .collect();
        let rec = serde_json::json!({ "sample_id": sid, "q2a": { "pred": (i % 2) as u8, "label": 0 }, "subs": subs });
        lines.push_str(&format!("{rec}\n"));
    }
    let preds = dir.path().join("preds.jsonl");
    std::fs::write(&preds, &lines).unwrap();
    let csv = dir.path().join("by_type.csv");
    let table = ok(&[
        "eval",
        "--predictions",
        s(&preds),
        "--questions",
        s(&out_dir.join("subquestions.jsonl")),
        "--corpus",
        s(&dir.path().join("corpus.jsonl")),
        "--by-type",
        s(&csv),
    ]);
    assert!(table.contains("q2a         0.5000       10       20"), "{table}");
    assert!(table.contains("q2s_bk      1.0000       20       20"), "{table}");
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("question_type,samples,q2a,q2a_total"));

    std::fs::write(&preds, lines.replacen("\"label\":0", "\"label\":9", 1)).unwrap();
    let out = mqag(&["eval", "--predictions", s(&preds)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside 0..=3"));
}

#[test]
fn coach_writes_the_pool() {
    let dir = workspace();
    let cfg = dir.path().join("config.toml");
    let out_dir = dir.path().join("out");
    ok(&["generate", "--config", s(&cfg), "--out", s(&out_dir)]);
    let qs: Vec<SubQuestion> = read_jsonl(&out_dir.join("subquestions.jsonl")).unwrap();
    let script: String = qs
        .iter()
        .map(|q| {
            let wrong = q.modality == mqag_core::corpus::Modality::Text;
            let choice = if wrong { (q.label_index + 1) % 4 } else { q.label_index };
            format!("{}\n", serde_json::json!({ "question_id": q.question_id, "choice_index": choice }))
        })
        .collect();
    std::fs::write(dir.path().join("script.jsonl"), script).unwrap();
    let pool = dir.path().join("pool.jsonl");
    let report = ok(&[
        "coach",
        "--config",
        s(&cfg),
        "--questions",
        s(&out_dir.join("subquestions.jsonl")),
        "--script",
        s(&dir.path().join("script.jsonl")),
        "--out",
        s(&pool),
    ]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    let text_questions = qs.iter().filter(|q| q.modality == mqag_core::corpus::Modality::Text).count();
    assert_eq!(report["admitted"], text_questions);
    assert_eq!(std::fs::read_to_string(&pool).unwrap().lines().count(), text_questions);

    let out = mqag(&["coach", "--config", s(&cfg), "--questions", s(&out_dir.join("subquestions.jsonl")), "--out", s(&pool)]);
    assert!(!out.status.success());
}

#[test]
fn annotate_aggregate_exports_finalized_questions() {
    let dir = workspace();
    let cfg = dir.path().join("config.toml");
    let out_dir = dir.path().join("out");
    ok(&["generate", "--config", s(&cfg), "--out", s(&out_dir), "--emit-tasks"]);
    let tasks_path = out_dir.join("tasks.jsonl");
    let tasks: Vec<VerificationTask> = read_jsonl(&tasks_path).unwrap();
    let data = dir.path().join("annot");
    {
        let store = AnnotationStore::open(&tasks_path, &data).unwrap();
        for (k, t) in tasks.iter().take(3).enumerate() {
            for i in 0..5 {
                // the last annotator on the second task disagrees
                let choice = if k == 1 && i == 4 { (t.generated_label + 1) % 7 } else { t.generated_label };
                let a = Annotation {
                    annotator_id: format!("a{i}"),
                    selected: BTreeSet::from([choice]),
                    corrected_texts: Default::default(),
                    corrected_stem: None,
                    custom_answer: None,
                    question_ok: true,
                };
                store.submit(&t.task_id, a).unwrap();
            }
        }
    }
    let final_path = dir.path().join("final.jsonl");
    let summary: serde_json::Value = serde_json::from_str(&ok(&[
        "annotate",
        "aggregate",
        "--tasks",
        s(&tasks_path),
        "--data-dir",
        s(&data),
        "--out",
        s(&final_path),
    ]))
    .unwrap();
    assert_eq!(summary["complete_tasks"], 3);
    assert_eq!(summary["finalized"], 3);
    assert_eq!(summary["quality"]["individual_acc"], 14.0 / 15.0);
    assert_eq!(summary["quality"]["group_acc"], 1.0);
    let finals: Vec<SubQuestion> = read_jsonl(&final_path).unwrap();
    assert_eq!(finals.len(), 3);
    for q in finals {
        q.check().unwrap();
    }
}
