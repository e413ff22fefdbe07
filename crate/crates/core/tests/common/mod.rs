//! Shared test helpers: random models and an exhaustive path-enumeration
//! oracle computed straight from the network CPTs.

#![allow(dead_code)]

use bien::corpus::FieldSet;
use bien::inference::Evidence;
use bien::model::{BienModel, CompiledChain, LastTarget, Observation, Segment, TagState};
use rand::Rng;

/// Fill every CPT row with random values over the allowed cells. With
/// `sparse`, some allowed cells are set to exactly zero (one cell per row
/// always stays positive).
pub fn randomize(model: &mut BienModel, rng: &mut impl Rng, sparse: bool) {
    for cpt in model.cpts_mut() {
        for row in 0..cpt.rows() {
            let allowed = cpt.allowed_row(row).to_vec();
            let keep = allowed.iter().position(|&a| a);
            let mut vals: Vec<f64> = allowed
                .iter()
                .enumerate()
                .map(|(v, &a)| {
                    if !a || (sparse && Some(v) != keep && rng.gen_bool(0.2)) {
                        0.0
                    } else {
                        rng.gen_range(0.01..1.0)
                    }
                })
                .collect();
            let s: f64 = vals.iter().sum();
            if s > 0.0 {
                vals.iter_mut().for_each(|v| *v /= s);
            }
            cpt.set_row(row, &vals).unwrap();
        }
    }
}

pub fn random_model(rng: &mut impl Rng, n_fields: usize, n_obs: usize, memory: bool, sparse: bool) -> BienModel {
    let names = ["stime", "etime", "location", "speaker"];
    let fields = FieldSet::new(&names[..n_fields]).unwrap();
    let obs: Vec<(String, usize)> = (0..n_obs).map(|k| (format!("o{k}"), rng.gen_range(2..5))).collect();
    let mut m = BienModel::build(fields, &obs, 0.1, memory).unwrap();
    randomize(&mut m, rng, sparse);
    m
}

pub fn random_observations(rng: &mut impl Rng, model: &BienModel, len: usize, p_missing: f64) -> Vec<Observation> {
    (0..len)
        .map(|_| {
            model
                .observables
                .iter()
                .map(|o| (!rng.gen_bool(p_missing)).then(|| rng.gen_range(0..o.cardinality as u32)))
                .collect()
        })
        .collect()
}

/// Joint probability of a (tag, segment) path with the evidence, from the
/// CPT tables directly.
pub fn joint(model: &BienModel, enabled: &[bool], ev: &Evidence, tags: &[TagState], segs: &[Segment]) -> f64 {
    let mut p = 1.0;
    let mut last = LastTarget::NONE;
    for t in 0..tags.len() {
        let (tag, ds) = (tags[t], segs[t]);
        if t == 0 {
            p *= model.segment_initial.prob(&[], ds.index());
            p *= model.tag_initial.prob(&[ds.index()], tag.index());
        } else {
            p *= model.segment_transition.prob(&[segs[t - 1].index()], ds.index());
            let cfg: Vec<usize> = if model.memory {
                vec![tags[t - 1].index(), last.index(), ds.index()]
            } else {
                vec![tags[t - 1].index(), ds.index()]
            };
            p *= model.tag_transition.prob(&cfg, tag.index());
        }
        for (k, cpt) in model.emissions.iter().enumerate() {
            if let (true, Some(v)) = (enabled[k], ev.observations[t][k]) {
                p *= cpt.prob(&[tag.index(), ds.index()], v as usize);
            }
        }
        last = last.update(tag);
    }
    p
}

pub struct Enumeration {
    pub total: f64,
    /// `gamma[t][state]` indexed by compiled state ids.
    pub gamma: Vec<Vec<f64>>,
    pub best: f64,
    pub best_paths: Vec<(Vec<TagState>, Vec<Segment>)>,
}

fn admissible(ev: &Evidence, t: usize, tag: TagState, ds: Segment) -> bool {
    let tag_ok = ev
        .tag_clamps
        .get(t)
        .and_then(Option::as_ref)
        .is_none_or(|set| set.contains(&tag));
    let seg_ok = ev.segment_clamps.get(t).copied().flatten().is_none_or(|d| d == ds);
    tag_ok && seg_ok
}

/// Enumerate every (tag, segment) sequence of the evidence length.
pub fn enumerate(model: &BienModel, enabled: &[bool], chain: &CompiledChain, ev: &Evidence) -> Enumeration {
    let t_len = ev.observations.len();
    let n_tags = model.tag_count();
    let mut out = Enumeration {
        total: 0.0,
        gamma: vec![vec![0.0; chain.len()]; t_len],
        best: 0.0,
        best_paths: Vec::new(),
    };
    let mut tags = Vec::with_capacity(t_len);
    let mut segs = Vec::with_capacity(t_len);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        model: &BienModel,
        enabled: &[bool],
        chain: &CompiledChain,
        ev: &Evidence,
        n_tags: usize,
        tags: &mut Vec<TagState>,
        segs: &mut Vec<Segment>,
        out: &mut Enumeration,
    ) {
        let t = tags.len();
        if t == ev.observations.len() {
            let p = joint(model, enabled, ev, tags, segs);
            if p == 0.0 {
                return;
            }
            out.total += p;
            let mut last = LastTarget::NONE;
            for i in 0..t {
                last = last.update(tags[i]);
                let s = chain.state_index(tags[i], last, segs[i]).expect("reachable");
                out.gamma[i][s] += p;
            }
            if p > out.best {
                out.best = p;
                out.best_paths.clear();
            }
            if p == out.best {
                out.best_paths.push((tags.clone(), segs.clone()));
            }
            return;
        }
        for ti in 0..n_tags {
            let tag = TagState::from_index(ti);
            for ds in Segment::ALL {
                if !admissible(ev, t, tag, ds) {
                    continue;
                }
                tags.push(tag);
                segs.push(ds);
                // prune prefixes that already have zero probability
                if joint_prefix_positive(model, tags, segs) {
                    rec(model, enabled, chain, ev, n_tags, tags, segs, out);
                }
                tags.pop();
                segs.pop();
            }
        }
    }
    rec(model, enabled, chain, ev, n_tags, &mut tags, &mut segs, &mut out);
    if out.total > 0.0 {
        for row in &mut out.gamma {
            row.iter_mut().for_each(|g| *g /= out.total);
        }
    }
    out
}

fn joint_prefix_positive(model: &BienModel, tags: &[TagState], segs: &[Segment]) -> bool {
    let t = tags.len() - 1;
    let (tag, ds) = (tags[t], segs[t]);
    if t == 0 {
        return model.segment_initial.prob(&[], ds.index()) > 0.0
            && model.tag_initial.prob(&[ds.index()], tag.index()) > 0.0;
    }
    let mut last = LastTarget::NONE;
    for &x in &tags[..t] {
        last = last.update(x);
    }
    let cfg: Vec<usize> = if model.memory {
        vec![tags[t - 1].index(), last.index(), ds.index()]
    } else {
        vec![tags[t - 1].index(), ds.index()]
    };
    model.segment_transition.prob(&[segs[t - 1].index()], ds.index()) > 0.0
        && model.tag_transition.prob(&cfg, tag.index()) > 0.0
}

/// Project a compiled state path onto (tags, segments).
pub fn split_path(chain: &CompiledChain, path: &[usize]) -> (Vec<TagState>, Vec<Segment>) {
    path.iter().map(|&s| (chain.states[s].tag, chain.states[s].segment)).unzip()
}

const SPEAKERS: &[&str] = &[
    "Dr. Joe Steals", "Prof. Mary Shaw", "John Smith", "Dr. Alice Walker", "Robert Brown",
    "Prof. Tom Mitchell", "Susan Miller", "Dr. David Jones", "Linda Moore", "Prof. James Allen",
];
const PLACES: &[&str] = &[
    "Wean Hall 5409", "Doherty Hall 2315", "Baker Hall A51", "Porter Hall 125C", "Hamerschlag Hall 1112",
    "Adamson Wing", "Newell Simon 3002", "Scaife Hall 214",
];
const TOPICS: &[&str] = &[
    "learning to parse text", "robot motion planning", "a theory of graphs", "fast sorting networks",
    "speech recognition", "probabilistic reasoning", "compiler design", "vision systems",
];
const TIMES: &[(&str, &str)] = &[
    ("3:30 PM", "5:00 PM"), ("10:00 am", "11:30 am"), ("12:00", "1:00"), ("4 pm", "5 pm"),
    ("2:00 PM", "3:00 PM"), ("11:00 AM", "12:00 PM"), ("1:30", "3:00"),
];

/// Small seminar-announcement corpus with inline field tags, for end-to-end
/// tests. Returns `(file name, text)` pairs.
pub fn seminar_corpus(n: usize, seed: u64) -> Vec<(String, String)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let speaker = SPEAKERS.choose(&mut rng).unwrap();
            let place = PLACES.choose(&mut rng).unwrap();
            let topic = TOPICS.choose(&mut rng).unwrap();
            let (st, et) = TIMES.choose(&mut rng).unwrap();
            let with_end = rng.gen_bool(0.6);
            let mut text = format!("Type:     cmu.cs.scs\nTopic:    {topic}\nDates:    {}-Mar-95\n", 1 + i % 28);
            if with_end {
                text += &format!("Time:     <stime>{st}</stime> - <etime>{et}</etime>\n");
            } else {
                text += &format!("Time:     <stime>{st}</stime>\n");
            }
            text += &format!("Place:    <location>{place}</location>\n\n");
            match rng.gen_range(0..3) {
                0 => text += &format!(
                    "<speaker>{speaker}</speaker> will present a talk on {topic} at <stime>{st}</stime> in <location>{place}</location>.\n"
                ),
                1 => text += &format!(
                    "Our speaker this week is <speaker>{speaker}</speaker>. The talk covers {topic}. Refreshments will be served.\n"
                ),
                _ => text += &format!(
                    "Please join us for a seminar by <speaker>{speaker}</speaker> on {topic}. All are welcome.\n"
                ),
            }
            (format!("doc{i:03}.txt"), text)
        })
        .collect()
}

/// Write `seminar_corpus` into `dir`.
pub fn write_seminar_corpus(dir: &std::path::Path, n: usize, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    for (name, text) in seminar_corpus(n, seed) {
        std::fs::write(dir.join(name), text).unwrap();
    }
}

/// `seminar_corpus` parsed into documents with the default field set.
pub fn seminar_documents(n: usize, seed: u64) -> Vec<bien::corpus::Document> {
    use bien::corpus::{parse_tagged_document, Abbreviations, ParseOptions};
    let fields = FieldSet::default();
    let abbreviations = Abbreviations::builtin();
    let opts = ParseOptions {
        fields: &fields,
        abbreviations: &abbreviations,
        strict: true,
    };
    seminar_corpus(n, seed)
        .into_iter()
        .map(|(id, text)| parse_tagged_document(&id, &text, &opts).unwrap().document)
        .collect()
}
