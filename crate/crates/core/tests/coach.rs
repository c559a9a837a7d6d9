mod common;

use std::sync::Arc;

use mqag_core::coach::{coach_pass, default_exclusions, ScriptedClient, TrainingPool, POOL_REASON};
use mqag_core::pipeline::GenerateOptions;

#[test]
fn failures_skip_the_sample_and_passes_do_not_duplicate() {
    let dir = tempfile::tempdir().unwrap();
    let records = common::mini_corpus();
    let out = common::mini_pipeline(dir.path()).generate(&records, GenerateOptions::default());
    let questions: Vec<_> = out.questions().cloned().collect();

    // always wrong, but nothing scripted for the first sample
    let skipped = &questions[0].sample_id;
    let client = ScriptedClient::new(
        questions.iter().filter(|q| &q.sample_id != skipped).map(|q| (q.question_id.clone(), (q.label_index + 1) % 4)),
    );
    let client = Arc::new(client);
    let (pool, report) = coach_pass(&records, &questions, client.clone(), &default_exclusions(), "p1", 2);
    assert!(report.skipped_samples.contains_key(skipped));
    assert_eq!(report.skipped_samples.len(), 1);
    assert_eq!(report.admitted, pool.len());
    assert_eq!(report.probed + report.excluded, questions.iter().filter(|q| &q.sample_id != skipped).count());
    assert!(pool.entries().iter().all(|e| e.reason == POOL_REASON && e.pass_id == "p1"));
    assert!(pool.entries().iter().all(|e| &e.question.sample_id != skipped));

    // a second pass admits nothing new into the same pool
    let (again, _) = coach_pass(&records, &questions, client, &default_exclusions(), "p2", 4);
    let mut merged = TrainingPool::default();
    for e in pool.entries().iter().chain(again.entries()) {
        merged.admit(e.question.clone(), &e.pass_id);
    }
    assert_eq!(merged.len(), pool.len());
    assert_eq!(again.question_ids(), pool.question_ids());
}
