mod common;

use bien::corpus::{FieldSet, SplitPlan};
use bien::eval::{
    assemble_slots, decode, gold_slots, report_cpt, run_experiment, score, Counts, ExperimentConfig, MatchMode,
    SlotPrediction,
};
use bien::features::FeatureMask;
use bien::inference::Evidence;
use bien::learning::{encode_tags, sample_corpus, LengthDistribution, TrainConfig};
use bien::model::{BienModel, CompiledChain};
use common::{enumerate, random_model, random_observations, seminar_documents};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quick() -> ExperimentConfig {
    ExperimentConfig {
        train: TrainConfig {
            max_iterations: 5,
            ..TrainConfig::default()
        },
        mask: FeatureMask::parse("no-pos,no-chunk").unwrap(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn near_deterministic_emissions_are_decoded_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fields = FieldSet::parse("stime,etime").unwrap();
    let n_tags = 9;
    let mut m = BienModel::build(fields, &[("id".into(), n_tags)], 0.1, true).unwrap();
    common::randomize(&mut m, &mut rng, false);
    // each tag emits its own index with probability 0.999
    let cpt = &mut m.emissions[0];
    for row in 0..cpt.rows() {
        let tag = row / 2;
        let vals: Vec<f64> = (0..n_tags).map(|v| if v == tag { 0.999 } else { 0.001 / 8.0 }).collect();
        cpt.set_row(row, &vals).unwrap();
    }
    let chain = CompiledChain::compile(&m, &[true]).unwrap();
    for d in sample_corpus(&m, 20, LengthDistribution::Uniform { min: 5, max: 60 }, 1) {
        let honest = d.observations.iter().zip(&d.tags).all(|(o, t)| o[0] == Some(t.index() as u32));
        if honest {
            assert_eq!(decode(&chain, &d.observations).unwrap(), d.tags);
        }
    }
}

#[test]
fn masked_decoding_is_the_transition_map_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..40 {
        let memory = rng.gen_bool(0.5);
        let m = random_model(&mut rng, 2, 2, memory, false);
        let len = rng.gen_range(1..=5);
        let obs = random_observations(&mut rng, &m, len, 0.0);
        let enabled = [false, false];
        let chain = CompiledChain::compile(&m, &enabled).unwrap();
        let tags = decode(&chain, &obs).unwrap();
        let oracle = enumerate(&m, &enabled, &chain, &Evidence::new(obs.clone()));
        assert!(oracle.best_paths.iter().any(|(t, _)| *t == tags));
        assert_eq!(decode(&chain, &obs).unwrap(), tags);
    }
}

#[test]
fn encode_then_assemble_recovers_gold() {
    for d in seminar_documents(60, 4) {
        let (slots, ill) = assemble_slots(&encode_tags(&d).unwrap(), &d.tokens);
        assert_eq!(ill, 0);
        assert_eq!(slots, gold_slots(&d));
    }
}

#[test]
fn single_run_equals_one_fit() {
    let corpus = seminar_documents(30, 2);
    let cfg = quick();
    let plan = SplitPlan::holdout(0.8, 1, 11);
    let result = run_experiment(&corpus, &plan, &cfg).unwrap();
    let part = &bien::corpus::split(corpus.len(), &plan).unwrap()[0];
    let train: Vec<_> = part.train.iter().map(|&i| &corpus[i]).collect();
    let test: Vec<_> = part.test.iter().map(|&i| &corpus[i]).collect();
    let (report, _) = cfg.evaluate(&cfg.fit(&train).unwrap(), &test).unwrap();
    assert_eq!(result.runs.len(), 1);
    assert_eq!(result.average, report);
}

#[test]
fn no_memory_training_ignores_document_order() {
    let mut cfg = quick();
    cfg.memory = false;
    let corpus = seminar_documents(25, 6);
    let forward: Vec<_> = corpus.iter().collect();
    let mut shuffled = forward.clone();
    shuffled.reverse();
    shuffled.swap(2, 11);
    let a = cfg.fit(&forward).unwrap();
    let b = cfg.fit(&shuffled).unwrap();
    assert_eq!(a.model, b.model);
}

#[test]
fn learned_report_prefers_stime_first() {
    let corpus = seminar_documents(40, 5);
    let docs: Vec<_> = corpus.iter().collect();
    let trained = quick().fit(&docs).unwrap();
    let r = report_cpt(&trained.model);
    let none = &r.rows[0];
    let best = (0..none.len()).max_by(|&a, &b| none[a].total_cmp(&none[b])).unwrap();
    assert_eq!(r.fields.name(best), "stime");
    for row in &r.rows {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

fn slot(field: usize, text: &str) -> SlotPrediction {
    SlotPrediction {
        field,
        text: text.into(),
        start: 0,
        end: 0,
    }
}

// (field, filler) pairs for predictions and gold, per document
type Docs = Vec<(Vec<(usize, u8)>, Vec<(usize, u8)>)>;

fn arb_docs() -> impl Strategy<Value = Docs> {
    let slots = prop::collection::vec((0usize..4, 0u8..4), 0..4);
    prop::collection::vec((slots.clone(), slots), 1..8)
}

fn build(docs: &Docs) -> (Vec<Vec<SlotPrediction>>, Vec<Vec<SlotPrediction>>) {
    let make = |v: &Vec<(usize, u8)>| v.iter().map(|&(f, t)| slot(f, &format!("w{t}"))).collect::<Vec<_>>();
    (docs.iter().map(|d| make(&d.0)).collect(), docs.iter().map(|d| make(&d.1)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scores_ignore_document_order(docs in arb_docs(), occurrence in any::<bool>(), rot in 0usize..8) {
        let mode = if occurrence { MatchMode::PerOccurrence } else { MatchMode::OnePerSlot };
        let fields = FieldSet::default();
        let (pred, gold) = build(&docs);
        let a = score(&pred, &gold, &fields, mode).unwrap();
        let mut docs = docs.clone();
        let k = rot % docs.len();
        docs.rotate_left(k);
        let (pred, gold) = build(&docs);
        prop_assert_eq!(a, score(&pred, &gold, &fields, mode).unwrap());
    }

    #[test]
    fn extra_predictions_move_scores_the_right_way(docs in arb_docs(), pick in any::<prop::sample::Index>(), field in 0usize..4) {
        let fields = FieldSet::default();
        let (pred, gold) = build(&docs);
        let base = score(&pred, &gold, &fields, MatchMode::OnePerSlot).unwrap();
        let d = pick.index(docs.len());

        // a correct answer: copy a gold filler
        if let Some(g) = gold[d].first().cloned() {
            let mut more = pred.clone();
            more[d].push(g.clone());
            let after = score(&more, &gold, &fields, MatchMode::OnePerSlot).unwrap();
            prop_assert!(after.per_field[g.field].recall >= base.per_field[g.field].recall);
        }

        // a wrong answer: a filler no gold slot uses
        let mut more = pred.clone();
        more[d].push(slot(field, "never"));
        let after = score(&more, &gold, &fields, MatchMode::OnePerSlot).unwrap();
        prop_assert!(after.per_field[field].precision <= base.per_field[field].precision);
        let c: Counts = after.per_field[field].counts;
        prop_assert!(c.correct <= c.produced && c.correct <= c.total);
    }
}
