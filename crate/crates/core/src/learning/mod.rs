//! Parameter estimation: gold tags are clamped, the document segment is
//! hidden and fitted by EM.

mod counts;
mod pins;
mod sample;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use counts::CountTable;
pub use pins::{parse_pins, PinnedCell};
pub use sample::{sample_corpus, LengthDistribution, SampledDocument};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::inference::{forward_backward, Evidence};
use crate::model::{BienModel, CompiledChain, LastTarget, Observation, Segment, SubTag, TagState};

/// Column holding observed segment labels, when a corpus has them.
pub const SEGMENT_COLUMN: &str = "ds";

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Treat segments as observed (requires every document to carry them).
    pub segments_observed: bool,
    /// Magnitude of the symmetric multiplicative jitter applied to the
    /// emission CPTs before EM.
    pub jitter: f64,
    pub pins: Vec<PinnedCell>,
    /// CPT names excluded from the M-step.
    pub frozen: Vec<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iterations: 50,
            rel_tolerance: 1e-4,
            alpha: 0.1,
            seed: 0,
            segments_observed: false,
            jitter: 1e-3,
            pins: Vec::new(),
            frozen: Vec::new(),
        }
    }
}

impl TrainConfig {
    // written to reject NaN too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::Config("rel_tolerance must be positive".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config("alpha must be a finite non-negative number".into()));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::Config("jitter must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One training sequence: gold tags, observations and optional segments.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDoc {
    pub id: String,
    pub tags: Vec<TagState>,
    pub observations: Vec<Observation>,
    pub segments: Option<Vec<Segment>>,
}

impl TrainingDoc {
    /// Pair a document's gold tags with its feature vectors. Segments are
    /// taken from the `ds` column when present.
    pub fn from_document(doc: &Document, vectors: &[FeatureVector]) -> Result<Self> {
        if vectors.len() != doc.len() {
            return Err(Error::Validation(format!(
                "`{}` has {} tokens but {} feature vectors",
                doc.id,
                doc.len(),
                vectors.len()
            )));
        }
        let segments = match doc.column(SEGMENT_COLUMN) {
            Some(col) => Some(
                col.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        Segment::parse(v).ok_or_else(|| Error::Validation(format!("`{}` token {i}: bad segment `{v}`", doc.id)))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        Ok(TrainingDoc {
            id: doc.id.clone(),
            tags: encode_tags(doc)?,
            observations: vectors.iter().map(FeatureVector::to_observation).collect(),
            segments,
        })
    }
}

/// Gold spans to B/I/E/S tag states; tokens outside spans are background.
pub fn encode_tags(doc: &Document) -> Result<Vec<TagState>> {
    doc.validate_spans()?;
    let mut tags = vec![TagState::Background; doc.len()];
    for span in &doc.gold_spans {
        for (i, tag) in tags.iter_mut().enumerate().take(span.end + 1).skip(span.start) {
            let sub = match (i == span.start, i == span.end) {
                (true, true) => SubTag::Single,
                (true, false) => SubTag::Begin,
                (false, true) => SubTag::End,
                (false, false) => SubTag::Inside,
            };
            *tag = TagState::Field { field: span.field, sub };
        }
    }
    Ok(tags)
}

/// First token at which `tags` violates the span structure, if any.
pub fn first_structural_violation(tags: &[TagState]) -> Option<usize> {
    if tags.first().is_some_and(|t| !t.can_start()) {
        return Some(0);
    }
    (1..tags.len()).find(|&t| !TagState::can_follow(tags[t - 1], tags[t]))
}

fn check_docs(model: &BienModel, docs: &[TrainingDoc], cfg: &TrainConfig) -> Result<()> {
    let n_tags = model.tag_count();
    for doc in docs {
        if doc.tags.len() != doc.observations.len() {
            return Err(Error::Validation(format!("`{}`: tags and observations differ in length", doc.id)));
        }
        if let Some(t) = doc.tags.iter().position(|t| t.index() >= n_tags) {
            return Err(Error::Validation(format!("`{}` token {t}: tag outside the model's field set", doc.id)));
        }
        if let Some(token) = first_structural_violation(&doc.tags) {
            return Err(Error::InconsistentGold {
                doc: doc.id.clone(),
                token,
            });
        }
        if cfg.segments_observed && doc.segments.as_ref().is_none_or(|s| s.len() != doc.tags.len()) {
            return Err(Error::Validation(format!("`{}` lacks observed segments", doc.id)));
        }
    }
    Ok(())
}

/// Counts for the single path of a fully observed document.
fn count_path(model: &BienModel, doc: &TrainingDoc, segments: &[Segment], enabled: &[bool], counts: &mut CountTable) {
    let mut last = LastTarget::NONE;
    for t in 0..doc.tags.len() {
        let (tag, ds) = (doc.tags[t], segments[t]);
        if t == 0 {
            counts.add_segment_initial(ds, 1.0);
            counts.add_tag_initial(ds, tag, 1.0);
        } else {
            counts.add_segment(segments[t - 1], ds, 1.0);
            counts.add_tag(model, doc.tags[t - 1], last, ds, tag, 1.0);
        }
        counts.add_observation(model, enabled, tag, ds, &doc.observations[t], 1.0);
        last = last.update(tag);
    }
}

fn evidence(doc: &TrainingDoc, segments_observed: bool) -> Evidence {
    let ev = Evidence::new(doc.observations.clone()).with_tags(&doc.tags);
    match (&doc.segments, segments_observed) {
        (Some(s), true) => ev.with_segments(s),
        _ => ev,
    }
}

/// Expected counts and log-likelihood for one document.
fn expected_counts(
    model: &BienModel,
    chain: &CompiledChain,
    doc: &TrainingDoc,
    cfg: &TrainConfig,
    counts: &mut CountTable,
) -> Result<f64> {
    if doc.tags.is_empty() {
        return Ok(0.0);
    }
    let ev = evidence(doc, cfg.segments_observed);
    let post = forward_backward(chain, &ev, true).map_err(|e| match e {
        Error::ZeroProbabilityEvidence { step } => Error::InconsistentGold {
            doc: doc.id.clone(),
            token: step,
        },
        other => other,
    })?;
    let enabled = &model.enabled;
    for (t, row) in post.gamma.iter().enumerate() {
        for (s, &g) in row.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let st = chain.states[s];
            if t == 0 {
                counts.add_segment_initial(st.segment, g);
                counts.add_tag_initial(st.segment, st.tag, g);
            }
            counts.add_observation(model, enabled, st.tag, st.segment, &doc.observations[t], g);
        }
    }
    for step in post.xi.as_deref().unwrap_or_default() {
        for &(id, p) in step {
            let edge = &chain.edges[id];
            let (a, b) = (chain.states[edge.from], chain.states[edge.to]);
            counts.add_segment(a.segment, b.segment, p);
            counts.add_tag(model, a.tag, a.last, b.segment, b.tag, p);
        }
    }
    Ok(post.log_likelihood)
}

const CHUNK: usize = 16;

/// E-step over all documents. Chunks are processed in parallel and merged
/// in document order, so the result does not depend on the thread count.
fn e_step(model: &BienModel, docs: &[TrainingDoc], cfg: &TrainConfig) -> Result<(CountTable, f64)> {
    let observed = cfg.segments_observed;
    let chain = if observed { None } else { Some(CompiledChain::compile(model, &model.enabled)?) };
    let parts: Vec<(CountTable, f64)> = docs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut counts = CountTable::zeros(model);
            let mut ll = 0.0;
            for doc in chunk {
                match &chain {
                    Some(chain) => ll += expected_counts(model, chain, doc, cfg, &mut counts)?,
                    None => {
                        let segs = doc.segments.as_deref().expect("checked");
                        count_path(model, doc, segs, &model.enabled, &mut counts);
                    }
                }
            }
            Ok((counts, ll))
        })
        .collect::<Result<_>>()?;
    let mut total = CountTable::zeros(model);
    let mut ll = 0.0;
    for (c, l) in parts {
        total.merge(&c);
        ll += l;
    }
    Ok((total, ll))
}

fn is_learnable(model: &BienModel, cfg: &TrainConfig, index: usize) -> bool {
    let name = &model.cpts().nth(index).expect("index in range").name;
    if cfg.frozen.iter().any(|f| f == name) {
        return false;
    }
    // emissions of disabled observables receive no counts
    index < 4 || model.enabled[index - 4]
}

fn pinned(cfg: &TrainConfig, cpt: usize, row: usize, value: usize) -> Option<f64> {
    cfg.pins
        .iter()
        .find(|p| p.cpt == cpt && p.row == row && p.value == value)
        .map(|p| p.prob)
}

/// Normalize `counts + alpha` over the free allowed cells of every learnable
/// row; pinned cells keep their value. Rows without any mass are left as
/// they were.
fn m_step(model: &mut BienModel, counts: &CountTable, cfg: &TrainConfig) {
    let learnable: Vec<bool> = (0..counts.tables.len()).map(|i| is_learnable(model, cfg, i)).collect();
    for (i, cpt) in model.cpts_mut().enumerate() {
        if !learnable[i] {
            continue;
        }
        let c = cpt.child_card;
        for row in 0..cpt.rows() {
            let mut pinned_mass = 0.0;
            let mut free_total = 0.0;
            for v in 0..c {
                if !cpt.allowed(row, v) {
                    continue;
                }
                match pinned(cfg, i, row, v) {
                    Some(p) => pinned_mass += p,
                    None => free_total += counts.tables[i][row * c + v] + cfg.alpha,
                }
            }
            if free_total <= 0.0 {
                continue;
            }
            let mut vals = vec![0.0; c];
            for (v, slot) in vals.iter_mut().enumerate() {
                if cpt.allowed(row, v) {
                    *slot = match pinned(cfg, i, row, v) {
                        Some(p) => p,
                        None => (counts.tables[i][row * c + v] + cfg.alpha) / free_total * (1.0 - pinned_mass),
                    };
                }
            }
            cpt.set_row(row, &vals).expect("row width");
        }
    }
}

/// `alpha * sum(log theta)` over the cells the M-step estimates.
fn log_prior(model: &BienModel, cfg: &TrainConfig) -> f64 {
    if cfg.alpha == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, cpt) in model.cpts().enumerate() {
        if !is_learnable(model, cfg, i) {
            continue;
        }
        for row in 0..cpt.rows() {
            for v in 0..cpt.child_card {
                if cpt.allowed(row, v) && pinned(cfg, i, row, v).is_none() {
                    acc += cpt.get(row, v).ln();
                }
            }
        }
    }
    cfg.alpha * acc
}

/// Write pinned values into the model and rescale the free cells of each
/// affected row to the remaining mass.
pub fn apply_pins(model: &mut BienModel, pins: &[PinnedCell]) -> Result<()> {
    let mut rows: Vec<(usize, usize)> = pins.iter().map(|p| (p.cpt, p.row)).collect();
    rows.sort_unstable();
    rows.dedup();
    for (i, row) in rows {
        let cpt = model.cpts_mut().nth(i).ok_or_else(|| Error::Config(format!("pin refers to CPT #{i}")))?;
        let here: Vec<&PinnedCell> = pins.iter().filter(|p| p.cpt == i && p.row == row).collect();
        let pinned_mass: f64 = here.iter().map(|p| p.prob).sum();
        if pinned_mass > 1.0 + 1e-12 {
            return Err(Error::Config(format!("pins on {} row {row} sum to {pinned_mass}", cpt.name)));
        }
        let c = cpt.child_card;
        let is_pinned = |v: usize| here.iter().find(|p| p.value == v).map(|p| p.prob);
        let free: Vec<usize> = (0..c).filter(|&v| cpt.allowed(row, v) && is_pinned(v).is_none()).collect();
        if free.is_empty() && (pinned_mass - 1.0).abs() > 1e-9 && cpt.is_reachable(row) {
            return Err(Error::Config(format!("pins fix every cell of {} row {row} but sum to {pinned_mass}", cpt.name)));
        }
        let current: f64 = free.iter().map(|&v| cpt.get(row, v)).sum();
        let mut vals = cpt.row(row).to_vec();
        for (v, x) in vals.iter_mut().enumerate().take(c) {
            if let Some(p) = is_pinned(v) {
                *x = p;
            }
        }
        for &v in &free {
            vals[v] = if current > 0.0 {
                cpt.get(row, v) / current * (1.0 - pinned_mass)
            } else {
                (1.0 - pinned_mass) / free.len() as f64
            };
        }
        cpt.set_row(row, &vals)?;
    }
    model.validate()
}

fn jitter_emissions(model: &mut BienModel, cfg: &TrainConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let frozen = cfg.frozen.clone();
    for (k, cpt) in model.emissions.iter_mut().enumerate() {
        // draw for every table so the stream does not depend on the mask
        let draws: Vec<f64> = (0..cpt.values().len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if frozen.contains(&cpt.name) || cfg.pins.iter().any(|p| p.cpt == 4 + k) {
            continue;
        }
        let c = cpt.child_card;
        for row in 0..cpt.rows() {
            let mut vals: Vec<f64> = (0..c).map(|v| cpt.get(row, v) * (1.0 + cfg.jitter * draws[row * c + v])).collect();
            let z: f64 = vals.iter().sum();
            if z > 0.0 {
                vals.iter_mut().for_each(|x| *x /= z);
                cpt.set_row(row, &vals).expect("row width");
            }
        }
    }
}

/// Fit `model` to `docs`. Returns the trained model and the objective after
/// each iteration: log-likelihood plus the smoothing prior
/// `alpha * sum(log theta)`, which EM never decreases.
pub fn train(model: &BienModel, docs: &[TrainingDoc], cfg: &TrainConfig) -> Result<(BienModel, Vec<f64>)> {
    cfg.validate()?;
    model.validate()?;
    check_docs(model, docs, cfg)?;
    // fixed merge order regardless of how the caller ordered the documents
    let mut sorted = docs.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let docs = &sorted[..];
    let mut model = model.clone();
    model.alpha = cfg.alpha;
    apply_pins(&mut model, &cfg.pins)?;
    if !cfg.segments_observed && cfg.jitter > 0.0 {
        jitter_emissions(&mut model, cfg);
    }

    let (mut counts, mut ll) = e_step(&model, docs, cfg)?;
    let mut prev = ll + log_prior(&model, cfg);
    let mut trace = Vec::new();
    for _ in 0..cfg.max_iterations {
        m_step(&mut model, &counts, cfg);
        model.validate()?;
        if cfg.segments_observed {
            // one closed-form step; the objective is the path likelihood
            let chain = CompiledChain::compile(&model, &model.enabled)?;
            ll = docs
                .iter()
                .map(|d| forward_backward(&chain, &evidence(d, true), false).map(|p| p.log_likelihood))
                .sum::<Result<f64>>()?;
            trace.push(ll + log_prior(&model, cfg));
            break;
        }
        (counts, ll) = e_step(&model, docs, cfg)?;
        let obj = ll + log_prior(&model, cfg);
        trace.push(obj);
        if obj < prev - 1e-9 * prev.abs().max(1.0) {
            return Err(Error::Numeric(format!("EM objective decreased from {prev} to {obj}")));
        }
        let converged = (obj - prev) <= cfg.rel_tolerance * prev.abs().max(1e-300);
        prev = obj;
        if converged {
            break;
        }
    }
    Ok((model, trace))
}
