mod common;

use std::collections::BTreeMap;

use bien::corpus::FieldSet;
use bien::error::Error;
use bien::learning::{
    apply_pins, encode_tags, parse_pins, sample_corpus, train, LengthDistribution, TrainConfig, TrainingDoc,
};
use bien::model::{spans_from_tags, BienModel, LastTarget, Segment, SubTag, TagState};
use common::{random_model, randomize};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blank_like(m: &BienModel, alpha: f64) -> BienModel {
    let obs: Vec<(String, usize)> = m.observables.iter().map(|o| (o.name.clone(), o.cardinality)).collect();
    BienModel::build(m.fields.clone(), &obs, alpha, m.memory).unwrap()
}

#[test]
fn em_objective_never_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..10 {
        let gen = random_model(&mut rng, 2, 2, true, false);
        let docs: Vec<TrainingDoc> = sample_corpus(&gen, 10, LengthDistribution::Uniform { min: 3, max: 30 }, trial)
            .iter()
            .map(|d| d.training_doc(false))
            .collect();
        let alpha = [0.0, 0.1, 1.0][trial as usize % 3];
        let cfg = TrainConfig {
            max_iterations: 20,
            rel_tolerance: 1e-14,
            alpha,
            seed: trial,
            ..Default::default()
        };
        let (_, trace) = train(&blank_like(&gen, alpha), &docs, &cfg).unwrap();
        assert!(!trace.is_empty());
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "trial {trial}: {w:?}");
        }
    }
}

#[test]
fn fully_observed_counts_are_exact_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..10 {
        let memory = rng.gen_bool(0.5);
        let gen = random_model(&mut rng, 2, 2, memory, false);
        let sampled = sample_corpus(&gen, 5, LengthDistribution::Uniform { min: 1, max: 10 }, trial);
        let docs: Vec<TrainingDoc> = sampled.iter().map(|d| d.training_doc(true)).collect();
        let cfg = TrainConfig {
            alpha: 0.0,
            segments_observed: true,
            ..Default::default()
        };
        let init = blank_like(&gen, 0.0);
        let (learned, trace) = train(&init, &docs, &cfg).unwrap();
        assert_eq!(trace.len(), 1);

        // independent tally: (cpt name, row, value) -> count
        let mut tally: BTreeMap<(String, usize, usize), i64> = BTreeMap::new();
        let mut bump = |name: &str, row: usize, value: usize| *tally.entry((name.to_string(), row, value)).or_default() += 1;
        for d in &sampled {
            let mut last = LastTarget::NONE;
            for t in 0..d.tags.len() {
                let (tag, ds) = (d.tags[t], d.segments[t]);
                if t == 0 {
                    bump("DS0", 0, ds.index());
                    bump("Tag0", ds.index(), tag.index());
                } else {
                    bump("DS", d.segments[t - 1].index(), ds.index());
                    let cpt = &learned.tag_transition;
                    let row = if learned.memory {
                        cpt.row_index(&[d.tags[t - 1].index(), last.index(), ds.index()])
                    } else {
                        cpt.row_index(&[d.tags[t - 1].index(), ds.index()])
                    };
                    bump("Tag", row, tag.index());
                }
                for (k, o) in learned.observables.iter().enumerate() {
                    bump(&o.name, tag.index() * 2 + ds.index(), d.observations[t][k].unwrap() as usize);
                }
                last = last.update(tag);
            }
        }
        for cpt in learned.cpts() {
            let before = init.cpt(&cpt.name).unwrap();
            for row in 0..cpt.rows() {
                let total: i64 = (0..cpt.child_card).map(|v| tally.get(&(cpt.name.clone(), row, v)).copied().unwrap_or(0)).sum();
                for v in 0..cpt.child_card {
                    let got = cpt.get(row, v);
                    if total == 0 {
                        assert_eq!(got, before.get(row, v));
                        continue;
                    }
                    let c = tally.get(&(cpt.name.clone(), row, v)).copied().unwrap_or(0);
                    let want = BigRational::new(c.into(), total.into());
                    let got_exact = BigRational::from_float(got).unwrap();
                    // the stored value is the nearest double to c / total
                    let diff = got_exact - &want;
                    let err = if diff < BigRational::from_integer(0.into()) { -diff } else { diff };
                    let bound = want.clone() / BigRational::from_integer((1u64 << 53).into());
                    assert!(err <= bound, "{} row {row} value {v}: {got} vs {c}/{total}", cpt.name);
                }
            }
        }
    }
}

#[test]
fn smoothing_keeps_allowed_cells_positive_and_zeros_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let gen = random_model(&mut rng, 2, 2, true, false);
    let docs: Vec<TrainingDoc> = sample_corpus(&gen, 5, LengthDistribution::Fixed(8), 1)
        .iter()
        .map(|d| d.training_doc(false))
        .collect();
    let (learned, _) = train(&blank_like(&gen, 0.1), &docs, &TrainConfig::default()).unwrap();
    learned.validate().unwrap();
    for cpt in learned.cpts() {
        for row in 0..cpt.rows() {
            for v in 0..cpt.child_card {
                if cpt.allowed(row, v) {
                    assert!(cpt.get(row, v) > 0.0);
                } else {
                    assert_eq!(cpt.get(row, v), 0.0);
                }
            }
        }
    }
}

#[test]
fn document_order_does_not_change_the_result() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let gen = random_model(&mut rng, 2, 2, false, false);
    let mut docs: Vec<TrainingDoc> = sample_corpus(&gen, 40, LengthDistribution::Uniform { min: 5, max: 20 }, 3)
        .iter()
        .map(|d| d.training_doc(false))
        .collect();
    let cfg = TrainConfig {
        max_iterations: 5,
        ..Default::default()
    };
    let (a, ta) = train(&blank_like(&gen, 0.1), &docs, &cfg).unwrap();
    docs.reverse();
    docs.swap(3, 17);
    let (b, tb) = train(&blank_like(&gen, 0.1), &docs, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
}

#[test]
fn pins_and_frozen_tables_survive_training() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut gen = random_model(&mut rng, 2, 2, true, false);
    let rules = "Tag|TagPrev=BG,LastTarget=none:B-etime -> 0\nDS0:Header -> 0.25";
    let gen_pins = parse_pins(rules, &gen).unwrap();
    apply_pins(&mut gen, &gen_pins).unwrap();
    let docs: Vec<TrainingDoc> = sample_corpus(&gen, 20, LengthDistribution::Fixed(15), 2)
        .iter()
        .map(|d| d.training_doc(false))
        .collect();
    let init = blank_like(&gen, 0.1);
    let pins = parse_pins(rules, &init).unwrap();
    let cfg = TrainConfig {
        pins,
        frozen: vec!["o1".into()],
        max_iterations: 5,
        ..Default::default()
    };
    let (learned, _) = train(&init, &docs, &cfg).unwrap();
    let b_etime = TagState::Field { field: 1, sub: SubTag::Begin };
    for ds in Segment::ALL {
        assert_eq!(learned.p_tag(TagState::Background, LastTarget::NONE, ds, b_etime), 0.0);
    }
    assert_eq!(learned.p_segment_initial(Segment::Header), 0.25);
    assert_eq!(learned.emissions[1], init.emissions[1]);
    assert_ne!(learned.emissions[0], init.emissions[0]);
}

#[test]
fn inconsistent_gold_is_reported() {
    let m = BienModel::build(FieldSet::parse("stime,etime").unwrap(), &[("a".into(), 2)], 0.1, true).unwrap();
    let inside = TagState::Field { field: 1, sub: SubTag::Inside };
    let doc = TrainingDoc {
        id: "bad".into(),
        tags: vec![TagState::Background, inside],
        observations: vec![vec![Some(0)]; 2],
        segments: None,
    };
    let err = train(&m, &[doc], &TrainConfig::default()).unwrap_err();
    assert!(matches!(err, Error::InconsistentGold { ref doc, token: 1 } if doc == "bad"));
}

#[test]
fn sampling_is_seeded_and_exact_for_deterministic_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = random_model(&mut rng, 2, 2, true, false);
    let a = sample_corpus(&m, 5, LengthDistribution::Uniform { min: 1, max: 30 }, 9);
    assert_eq!(a, sample_corpus(&m, 5, LengthDistribution::Uniform { min: 1, max: 30 }, 9));
    assert_ne!(a, sample_corpus(&m, 5, LengthDistribution::Uniform { min: 1, max: 30 }, 10));
    for d in &a {
        assert_eq!(spans_from_tags(&d.tags).0, d.document.gold_spans);
        assert_eq!(encode_tags(&d.document).unwrap(), d.tags);
    }

    let mut det = m.clone();
    for cpt in det.cpts_mut() {
        for row in 0..cpt.rows() {
            let first = cpt.allowed_row(row).iter().position(|&x| x).unwrap();
            let mut vals = vec![0.0; cpt.child_card];
            vals[first] = 1.0;
            cpt.set_row(row, &vals).unwrap();
        }
    }
    let docs = sample_corpus(&det, 6, LengthDistribution::Fixed(12), 4);
    assert!(docs.windows(2).all(|w| w[0].tags == w[1].tags && w[0].observations == w[1].observations));
}

#[test]
fn empirical_transitions_match_the_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut m = BienModel::build(FieldSet::parse("stime,etime").unwrap(), &[("a".into(), 3)], 0.1, true).unwrap();
    randomize(&mut m, &mut rng, false);
    let docs = sample_corpus(&m, 100, LengthDistribution::Fixed(1000), 8);
    let mut counts = [[0usize; 2]; 2];
    for d in &docs {
        for w in d.segments.windows(2) {
            counts[w[0].index()][w[1].index()] += 1;
        }
    }
    for prev in Segment::ALL {
        let row = counts[prev.index()];
        let n = (row[0] + row[1]) as f64;
        for ds in Segment::ALL {
            let freq = row[ds.index()] as f64 / n;
            assert!((freq - m.p_segment(prev, ds)).abs() < 0.01);
        }
    }
}
