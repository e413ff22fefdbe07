//! Ancestral sampling of synthetic tagged documents from a model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SEGMENT_COLUMN;
use crate::corpus::{Document, Token};
use crate::model::{spans_from_tags, BienModel, LastTarget, Observation, Segment, SubTag, TagState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthDistribution {
    Fixed(usize),
    /// Uniform over `min..=max`.
    Uniform { min: usize, max: usize },
}

impl LengthDistribution {
    fn draw(self, rng: &mut impl Rng) -> usize {
        match self {
            LengthDistribution::Fixed(n) => n,
            LengthDistribution::Uniform { min, max } => rng.gen_range(min..=max.max(min)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledDocument {
    /// Tokens are `t<v>` where `v` is the token's first observable value;
    /// gold spans and the `ds` column come from the sampled hidden states.
    pub document: Document,
    pub observations: Vec<Observation>,
    pub tags: Vec<TagState>,
    pub segments: Vec<Segment>,
}

fn categorical(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    // rounding left u above the cumulative sum
    last_positive
}

const MAX_OVERRUN: usize = 200;

fn is_open(tag: TagState) -> bool {
    matches!(tag.sub(), Some(SubTag::Begin | SubTag::Inside))
}

/// Draw a closing tag from `probs` restricted to non-open values, or the
/// first allowed closing value when that restriction has no mass.
fn close_slot(rng: &mut impl Rng, probs: &[f64], allowed: &[bool]) -> TagState {
    let masked: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| if is_open(TagState::from_index(i)) { 0.0 } else { p })
        .collect();
    let z: f64 = masked.iter().sum();
    if z > 0.0 {
        let norm: Vec<f64> = masked.iter().map(|p| p / z).collect();
        return TagState::from_index(categorical(rng, &norm));
    }
    let i = (0..allowed.len())
        .find(|&i| allowed[i] && !is_open(TagState::from_index(i)))
        .expect("every row allows a closing tag");
    TagState::from_index(i)
}

/// Draw `n_docs` documents from the joint distribution of `model`.
///
/// A slot still open at the drawn length keeps being sampled until it
/// closes, so every document carries well-formed gold spans. After 200
/// extra tokens the next tag is drawn from the closing values only.
pub fn sample_corpus(model: &BienModel, n_docs: usize, lengths: LengthDistribution, seed: u64) -> Vec<SampledDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_docs)
        .map(|d| {
            let len = lengths.draw(&mut rng);
            let mut tags = Vec::with_capacity(len);
            let mut segments: Vec<Segment> = Vec::with_capacity(len);
            let mut observations = Vec::with_capacity(len);
            let mut last = LastTarget::NONE;
            let mut t = 0;
            // a slot still open at the drawn length is sampled to its end
            while t < len || tags.last().is_some_and(|&x: &TagState| is_open(x)) {
                let forced_close = t >= len + MAX_OVERRUN;
                let ds = if t == 0 {
                    Segment::from_index(categorical(&mut rng, model.segment_initial.row(0)))
                } else {
                    let prev = segments[t - 1];
                    Segment::from_index(categorical(&mut rng, model.segment_transition.row(prev.index())))
                };
                let tag = if t == 0 {
                    TagState::from_index(categorical(&mut rng, model.tag_initial.row(ds.index())))
                } else {
                    let row = model.tag_row(tags[t - 1], last, ds);
                    let probs = model.tag_transition.row(row);
                    if forced_close {
                        close_slot(&mut rng, probs, model.tag_transition.allowed_row(row))
                    } else {
                        TagState::from_index(categorical(&mut rng, probs))
                    }
                };
                let erow = model.emission_row(tag, ds);
                let obs: Observation = model
                    .emissions
                    .iter()
                    .map(|cpt| Some(categorical(&mut rng, cpt.row(erow)) as u32))
                    .collect();
                last = last.update(tag);
                tags.push(tag);
                segments.push(ds);
                observations.push(obs);
                t += 1;
            }
            let mut tokens = Vec::with_capacity(len);
            let mut text = String::new();
            for obs in &observations {
                if !text.is_empty() {
                    text.push(' ');
                }
                let surface = format!("t{}", obs.first().copied().flatten().unwrap_or(0));
                tokens.push(Token::new(surface.clone(), text.chars().count()));
                text.push_str(&surface);
            }
            let (gold_spans, _) = spans_from_tags(&tags);
            let mut document = Document {
                id: format!("synthetic-{d:05}"),
                text,
                tokens,
                gold_spans,
                ..Default::default()
            };
            document
                .columns
                .insert(SEGMENT_COLUMN.to_string(), segments.iter().map(|s| s.label().to_string()).collect());
            SampledDocument {
                document,
                observations,
                tags,
                segments,
            }
        })
        .collect()
}

impl SampledDocument {
    pub fn training_doc(&self, with_segments: bool) -> super::TrainingDoc {
        super::TrainingDoc {
            id: self.document.id.clone(),
            tags: self.tags.clone(),
            observations: self.observations.clone(),
            segments: with_segments.then(|| self.segments.clone()),
        }
    }
}
