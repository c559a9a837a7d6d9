use std::collections::BTreeSet;

use proptest::prelude::*;

use mqag_core::annotate::{aggregate_task, AggregateOutcome, Annotation, AnnotationBatch, VerificationTask};
use mqag_core::corpus::{ImageRef, Modality};
use mqag_core::filter::shuffle_choices;
use mqag_core::graph::zscores;
use mqag_core::kb::{KnowledgeEdge, KnowledgeStore, Relation, RelationPool};
use mqag_core::metrics::{self, Answer, PredictionRecord, SubPrediction};
use mqag_core::qagen::{self, TripletRef};
use mqag_core::scorers::offline::{HashedBow, TagJaccard};
use mqag_core::scorers::{ImageTextScorer, SentenceEncoder};
use mqag_core::stats::{split_of, Split};
use mqag_core::svo::Slot;
use mqag_core::{lexicon, text};

fn modality() -> impl Strategy<Value = Modality> {
    prop::sample::select(Modality::ALL.to_vec())
}

fn record() -> impl Strategy<Value = PredictionRecord> {
    let sub = (modality(), 0u8..4, 0u8..4).prop_map(|(m, pred, label)| SubPrediction {
        question_id: format!("q-{}", m.code()),
        modality: m,
        pred,
        label,
    });
    ((0u8..4, 0u8..4), prop::collection::vec(sub, 0..7)).prop_map(|((pred, label), subs)| PredictionRecord {
        sample_id: "s".into(),
        q2a: Answer { pred, label },
        subs,
    })
}

proptest! {
    #[test]
    fn shuffle_is_a_seeded_permutation(
        correct in "[a-z]{1,8}",
        distractors in prop::collection::btree_set("[A-Z]{1,8}", 3),
        seed in any::<u64>(),
    ) {
        let d: Vec<String> = distractors.into_iter().collect();
        let (choices, label) = shuffle_choices(&correct, &d, seed);
        prop_assert_eq!(&choices[label], &correct);
        let mut sorted = choices.clone();
        sorted.sort();
        let mut want = d.clone();
        want.push(correct.clone());
        want.sort();
        prop_assert_eq!(sorted, want);
        prop_assert_eq!(shuffle_choices(&correct, &d, seed), (choices, label));
    }

    #[test]
    fn zscores_are_standardized(xs in prop::collection::vec(-100.0f64..100.0, 2..40)) {
        let z = zscores(&xs);
        prop_assert_eq!(z.len(), xs.len());
        let spread = xs.iter().any(|x| (x - xs[0]).abs() > 1e-6);
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9);
        if spread {
            let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            prop_assert!((var - 1.0).abs() < 1e-6, "variance {}", var);
        }
    }

    #[test]
    fn bow_similarity_is_a_bounded_symmetric_score(a in "[a-z ]{0,40}", b in "[a-z ]{0,40}") {
        let e = HashedBow;
        let ab = e.similarity(&a, &b).unwrap();
        prop_assert_eq!(ab, e.similarity(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        if !text::words(&a).is_empty() {
            prop_assert_eq!(e.similarity(&a, &a).unwrap(), 1.0);
        }
    }

    #[test]
    fn tag_overlap_is_in_unit_range(tags in prop::collection::vec("[a-z]{2,6}", 0..5), s in "[a-z ]{0,40}") {
        let image = ImageRef { image_id: "i".into(), object_tags: tags };
        let v = TagJaccard.score(&image, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn metric_identities(recs in prop::collection::vec(record(), 0..60)) {
        let r = metrics::aggregate(&recs);
        for (_, m) in r.named() {
            prop_assert_eq!(m.total + m.excluded, recs.len());
            prop_assert!(m.correct <= m.total);
        }
        prop_assert_eq!(r.q2a.total, recs.len());
        for (both, sub) in [(r.q2as_v, r.q2s_v), (r.q2as_t, r.q2s_t), (r.q2as_bk, r.q2s_bk)] {
            prop_assert_eq!(both.total, sub.total);
            prop_assert!(both.correct <= sub.correct.min(r.q2a.correct));
        }
        for sub in [r.q2s_v, r.q2s_t, r.q2s_bk] {
            prop_assert!(r.q2s.correct <= sub.correct);
            prop_assert!(r.q2s.total <= sub.total);
        }
    }

    #[test]
    fn aggregation_rules_hold(
        label in 0u8..7,
        sels in prop::collection::vec(prop::collection::btree_set(0u8..9, 1..4), 5),
    ) {
        let task = VerificationTask {
            task_id: "t".into(),
            question_id: "t".into(),
            sample_id: "s".into(),
            image_id: "i".into(),
            modality: Modality::Text,
            asked_slot: Slot::Object,
            source_triplet: TripletRef { s: "a".into(), p: "has".into(), o: "b".into() },
            stem: "What does a have?".into(),
            choices: (0..7).map(|i| format!("Choice {i}.")).collect(),
            generated_label: label,
        };
        let annotations = sels
            .iter()
            .enumerate()
            .map(|(i, s)| Annotation {
                annotator_id: format!("a{i}"),
                selected: s.clone(),
                corrected_texts: Default::default(),
                corrected_stem: None,
                custom_answer: s.contains(&7).then(|| "something else".to_string()),
                question_ok: true,
            })
            .collect();
        let batch = AnnotationBatch { task_id: "t".into(), annotations };
        let counts = batch.counts();
        if let AggregateOutcome::Finalized(f) = aggregate_task(&task, &batch).unwrap() {
            prop_assert!(f.winner < 7);
            prop_assert!(f.winner_votes >= 3);
            prop_assert_eq!(counts.iter().filter(|&&c| c == f.winner_votes).count(), 1);
            prop_assert_eq!(f.distractor_ids.len(), 3);
            prop_assert!(f.distractor_ids.iter().all(|&d| counts[usize::from(d)] == 0));
            prop_assert_eq!(f.label_changed, f.winner != label);
            f.question.check().unwrap();
        }
    }

    #[test]
    fn store_round_trips(edges in prop::collection::vec(("[a-e]", 0usize..6, "[a-e]", 0.0f64..3.0), 0..30)) {
        let rels = [Relation::IsA, Relation::RelatedTo, Relation::AtLocation, Relation::Antonym, Relation::HasA, Relation::PartOf];
        let edges: Vec<KnowledgeEdge> = edges
            .into_iter()
            .filter(|(s, _, o, _)| s != o)
            .map(|(s, r, o, w)| KnowledgeEdge { subject: s, relation: rels[r], object: o, weight: w })
            .collect();
        let store = KnowledgeStore::from_edges(edges);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kb.bin");
        store.save(&path).unwrap();
        let back = KnowledgeStore::open(&path).unwrap();
        prop_assert_eq!(store.edges(), back.edges());
        let pool = RelationPool::background_knowledge();
        for c in ["a", "b", "c", "d", "e"] {
            prop_assert_eq!(store.neighbors(c, &pool, 4), back.neighbors(c, &pool, 4));
            for d in ["a", "b", "c", "d", "e"] {
                let s = store.concept_similarity(c, d);
                prop_assert_eq!(s, store.concept_similarity(d, c));
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }
    }

    #[test]
    fn concept_normalization_is_idempotent(s in "[A-Za-z _]{0,20}") {
        let once = text::normalize_concept(&s);
        prop_assert_eq!(text::normalize_concept(&once), once.clone());
        prop_assert!(!once.contains(' '));
    }

    #[test]
    fn seeds_and_splits_are_stable(seed in any::<u64>(), id in "[a-z0-9-]{1,12}") {
        prop_assert_eq!(qagen::question_seed(seed, "slot", &id), qagen::question_seed(seed, "slot", &id));
        prop_assert_ne!(qagen::question_seed(seed, "slot", &id), qagen::question_seed(seed, "shuffle", &id));
        prop_assert_eq!(split_of(&id), split_of(&id));
    }
}

#[test]
fn regular_nouns_round_trip_through_plural() {
    for w in ["boy", "guitar", "box", "church", "baby", "man", "child", "person", "knife"] {
        assert_eq!(lexicon::singularize(&lexicon::pluralize(w)), w, "{w}");
    }
}

#[test]
fn validation_split_is_about_one_in_eleven() {
    let ids: Vec<String> = (0..11_000).map(|i| format!("sample-{i}")).collect();
    let val = ids.iter().filter(|id| split_of(id) == Split::Val).count();
    assert!((800..1200).contains(&val), "{val}");
    let distinct: BTreeSet<Split> = ids.iter().map(|id| split_of(id)).collect();
    assert_eq!(distinct.len(), 2);
}
