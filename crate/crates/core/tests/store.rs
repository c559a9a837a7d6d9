mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use mqag_core::annotate::store::{AnnotationStore, StoreError, TaskStatus};
use mqag_core::annotate::Annotation;
use mqag_core::kb::{self, KnowledgeStore, RelationPool};
use mqag_core::pipeline::GenerateOptions;

#[test]
fn mini_slice_ingest_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (store, report) = kb::ingest(&common::mini_dir().join("conceptnet_slice.tsv"), &dir.path().join("kb.bin")).unwrap();
    assert_eq!(report.lines, 559);
    // three broken rows plus the music/music self-loop
    assert_eq!(report.skipped_malformed, 4);
    assert_eq!(report.skipped_unknown_relation, 10);
    assert_eq!(report.accepted, 545);
    assert_eq!(report.edges_in_store, store.len());
    assert_eq!(report.accepted - report.duplicates_merged, store.len());

    let reopened = KnowledgeStore::open(&dir.path().join("kb.bin")).unwrap();
    assert_eq!(reopened.edges(), store.edges());
    assert_eq!(store.taxonomy_distance("trombone", "guitar"), Some(4));
    assert_eq!(store.concept_similarity("trombone", "brass instrument"), 0.5);
    let n = store.neighbors("trombone", &RelationPool::background_knowledge(), 4);
    assert_eq!(n.len(), 4);
}

fn vote(annotator: &str, choice: u8) -> Annotation {
    Annotation {
        annotator_id: annotator.into(),
        selected: BTreeSet::from([choice]),
        corrected_texts: Default::default(),
        corrected_stem: None,
        custom_answer: None,
        question_ok: true,
    }
}

#[test]
fn concurrent_submissions_stop_at_five() {
    let dir = tempfile::tempdir().unwrap();
    let opts = GenerateOptions { emit_tasks: true, ..Default::default() };
    let out = common::mini_pipeline(dir.path()).generate(&common::mini_corpus(), opts);
    let tasks: Vec<_> = out.results.into_iter().flat_map(|r| r.tasks).collect();
    let first = tasks[0].task_id.clone();
    let store = Arc::new(AnnotationStore::with_tasks(tasks, &dir.path().join("annot")).unwrap());

    let handles: Vec<_> = (0..12)
        .map(|i| {
            let (store, id) = (store.clone(), first.clone());
            std::thread::spawn(move || store.submit(&id, vote(&format!("a{i}"), 0)))
        })
        .collect();
    let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 5);
    assert!(results.iter().filter_map(|r| r.as_ref().err()).all(|e| matches!(e, StoreError::TaskComplete(_))));
    assert_eq!(store.view(&first).unwrap().status, TaskStatus::Complete);

    // the journal holds exactly the accepted five
    drop(store);
    let journal = std::fs::read_to_string(dir.path().join("annot/journal").join(format!("{first}.jsonl"))).unwrap();
    assert_eq!(journal.lines().count(), 5);
}

#[test]
fn aggregation_uses_only_complete_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let opts = GenerateOptions { emit_tasks: true, ..Default::default() };
    let out = common::mini_pipeline(dir.path()).generate(&common::mini_corpus(), opts);
    let tasks: Vec<_> = out.results.into_iter().flat_map(|r| r.tasks).collect();
    let (a, b) = (tasks[0].clone(), tasks[1].clone());
    let store = AnnotationStore::with_tasks(tasks, &dir.path().join("annot")).unwrap();
    for i in 0..5 {
        store.submit(&a.task_id, vote(&format!("a{i}"), a.generated_label)).unwrap();
    }
    store.submit(&b.task_id, vote("a0", b.generated_label)).unwrap();
    let outcomes = store.aggregate_complete();
    assert_eq!(outcomes.len(), 1);
    let export = store.export_jsonl();
    assert_eq!(export.lines().count(), 1);
    let q: mqag_core::qagen::SubQuestion = serde_json::from_str(export.lines().next().unwrap()).unwrap();
    assert_eq!(q.correct_answer(), a.choices[usize::from(a.generated_label)]);
    let labels = store.generated_labels();
    assert_eq!(labels.len(), store.task_ids().count());
    let metrics = mqag_core::annotate::annotation_metrics(&store.batches(), &labels);
    assert_eq!(metrics.tasks, 2);
    assert_eq!(metrics.individual_acc, Some(1.0));
}

#[test]
fn skips_go_to_the_review_queue() {
    let dir = tempfile::tempdir().unwrap();
    let opts = GenerateOptions { emit_tasks: true, ..Default::default() };
    let out = common::mini_pipeline(dir.path()).generate(&common::mini_corpus(), opts);
    let tasks: Vec<_> = out.results.into_iter().flat_map(|r| r.tasks).collect();
    let id = tasks[0].task_id.clone();
    let store = AnnotationStore::with_tasks(tasks, &dir.path().join("annot")).unwrap();
    let skip = Annotation { question_ok: false, selected: BTreeSet::new(), ..vote("a0", 0) };
    let view = store.submit(&id, skip).unwrap();
    assert_eq!(view.annotations_needed, 5);
    let queue = std::fs::read_to_string(store.review_queue_path()).unwrap();
    assert!(queue.contains("\"a0\""));
    assert!(store.next_for("a0").is_some_and(|v| v.task_id != id));
}
