mod common;

use bien::error::Error;
use bien::inference::{path_log_probability, Evidence};
use bien::learning::{sample_corpus, LengthDistribution};
use bien::model::{deserialize, serialize, CompiledChain, LastTarget, Segment, TagState};
use common::{joint, random_model};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chain_path(chain: &CompiledChain, tags: &[TagState], segs: &[Segment]) -> Vec<usize> {
    let mut last = LastTarget::NONE;
    tags.iter()
        .zip(segs)
        .map(|(&tag, &ds)| {
            last = last.update(tag);
            chain.state_index(tag, last, ds).expect("sampled state is reachable")
        })
        .collect()
}

#[test]
fn compiled_chain_matches_the_network_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..200u64 {
        let memory = rng.gen_bool(0.7);
        let fields = rng.gen_range(1..=3);
        let model = random_model(&mut rng, fields, 3, memory, false);
        let enabled: Vec<bool> = (0..3).map(|_| rng.gen_bool(0.7)).collect();
        let chain = CompiledChain::compile(&model, &enabled).unwrap();
        for d in sample_corpus(&model, 3, LengthDistribution::Uniform { min: 1, max: 8 }, trial) {
            let ev = Evidence::new(d.observations.clone());
            let path = chain_path(&chain, &d.tags, &d.segments);
            let via_chain = path_log_probability(&chain, &ev, &path).unwrap().exp();
            let direct = joint(&model, &enabled, &ev, &d.tags, &d.segments);
            assert!(
                (via_chain - direct).abs() <= 1e-12 * direct,
                "trial {trial}: {via_chain} vs {direct}"
            );
        }
    }
}

#[test]
fn transition_rows_are_stochastic_and_respect_structural_zeros() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let memory = rng.gen_bool(0.5);
        let model = random_model(&mut rng, 4, 2, memory, false);
        let chain = CompiledChain::compile(&model, &[true, true]).unwrap();
        let m = chain.transition_matrix();
        for (i, row) in m.iter().enumerate() {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-9, "row {i} sums to {s}");
            let from = chain.states[i];
            for (j, &p) in row.iter().enumerate() {
                if !TagState::can_follow(from.tag, chain.states[j].tag) {
                    assert_eq!(p, 0.0);
                }
            }
        }
        let init: f64 = chain.initial.iter().map(|l| l.exp()).sum();
        assert!((init - 1.0).abs() < 1e-9);
    }
}

#[test]
fn state_space_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (fields, states) in [(1, 12), (2, 22), (4, 42)] {
        let m = random_model(&mut rng, fields, 1, true, false);
        assert_eq!(CompiledChain::compile(&m, &[true]).unwrap().len(), states);
    }
}

#[test]
fn tampered_model_files_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = random_model(&mut rng, 2, 2, true, false);
    let text = serialize(&m);
    let changed = text.replacen("alpha", "alpha ", 1);
    assert!(matches!(deserialize(&changed), Err(Error::ChecksumMismatch)));
    let cut = &text[..text.len() / 2];
    assert!(matches!(deserialize(cut), Err(Error::ChecksumMismatch)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_round_trips_exactly(seed in any::<u64>(), fields in 1usize..=4, obs in 1usize..=3, memory in any::<bool>(), sparse in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = random_model(&mut rng, fields, obs, memory, sparse);
        m.enabled = (0..obs).map(|_| rng.gen_bool(0.5)).collect();
        let text = serialize(&m);
        let back = deserialize(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(serialize(&back), text);
    }
}
