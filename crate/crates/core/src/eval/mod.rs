//! Decoding, slot assembly and precision/recall/F1 scoring.

mod cpt_report;
mod experiment;
mod output;

pub use cpt_report::{report_cpt, CptReport};
pub use experiment::{
    ablation_grid, learning_curve, run_experiment, Ablation, CurvePoint, ExperimentConfig, ExperimentResult, RunOutcome,
    TrainedModel,
};
pub use output::{ablation_csv, ablation_table, counts_csv, curve_csv, report_csv, report_table};

use std::fmt;
use std::str::FromStr;

use crate::corpus::{Document, FieldSet, Token};
use crate::error::{Error, Result};
use crate::inference::{viterbi, Evidence};
use crate::model::{spans_from_tags, CompiledChain, Observation, TagState};

/// One extracted slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotPrediction {
    pub field: usize,
    /// Filler: token surfaces joined by single spaces.
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Viterbi decoding projected onto the Tag variable.
pub fn decode(chain: &CompiledChain, observations: &[Observation]) -> Result<Vec<TagState>> {
    let (path, _) = viterbi(chain, &Evidence::new(observations.to_vec()))?;
    Ok(path.into_iter().map(|s| chain.states[s].tag).collect())
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Group tags into slots. Returns the slots and the number of ill-formed
/// runs that were salvaged.
pub fn assemble_slots(tags: &[TagState], tokens: &[Token]) -> (Vec<SlotPrediction>, usize) {
    let (spans, ill_formed) = spans_from_tags(tags);
    let slots = spans
        .into_iter()
        .map(|s| SlotPrediction {
            field: s.field,
            text: normalize(
                &tokens[s.start..=s.end]
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            start: s.start,
            end: s.end,
        })
        .collect();
    (slots, ill_formed)
}

/// The document's gold spans as slots, in span order.
pub fn gold_slots(doc: &Document) -> Vec<SlotPrediction> {
    let mut spans = doc.gold_spans.clone();
    spans.sort_by_key(|s| (s.start, s.end, s.field));
    spans
        .iter()
        .map(|s| SlotPrediction {
            field: s.field,
            text: normalize(&doc.filler(s.start, s.end)),
            start: s.start,
            end: s.end,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// A field of a document is credited once if any predicted filler
    /// string equals any gold filler string.
    #[default]
    OnePerSlot,
    /// Every predicted span must match a gold span exactly.
    PerOccurrence,
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::OnePerSlot => "slot",
            MatchMode::PerOccurrence => "occurrence",
        })
    }
}

impl FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slot" | "one-per-slot" => Ok(MatchMode::OnePerSlot),
            "occurrence" | "per-occurrence" | "span" => Ok(MatchMode::PerOccurrence),
            _ => Err(Error::Config(format!("unknown match mode `{s}` (slot or occurrence)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub produced: usize,
    pub correct: usize,
    pub total: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.produced += other.produced;
        self.correct += other.correct;
        self.total += other.total;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Counts,
}

pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

impl FieldScore {
    pub fn from_counts(counts: Counts) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(counts.correct, counts.produced);
        let recall = ratio(counts.correct, counts.total);
        FieldScore {
            precision,
            recall,
            f1: f_measure(precision, recall),
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub fields: FieldSet,
    pub per_field: Vec<FieldScore>,
    /// Unweighted mean of the per-field figures.
    pub macro_avg: FieldScore,
    pub runs: usize,
}

impl EvalReport {
    fn from_scores(fields: FieldSet, per_field: Vec<FieldScore>, runs: usize) -> Self {
        let n = per_field.len().max(1) as f64;
        let mut counts = Counts::default();
        per_field.iter().for_each(|s| counts.add(s.counts));
        let macro_avg = FieldScore {
            precision: per_field.iter().map(|s| s.precision).sum::<f64>() / n,
            recall: per_field.iter().map(|s| s.recall).sum::<f64>() / n,
            f1: per_field.iter().map(|s| s.f1).sum::<f64>() / n,
            counts,
        };
        EvalReport {
            fields,
            per_field,
            macro_avg,
            runs,
        }
    }

    pub fn field(&self, name: &str) -> Option<&FieldScore> {
        self.fields.id(name).map(|i| &self.per_field[i])
    }

    /// Average P, R and F independently across runs; counts are summed.
    pub fn average(reports: &[EvalReport]) -> Result<EvalReport> {
        let first = reports.first().ok_or_else(|| Error::Config("no runs to average".into()))?;
        if reports.iter().any(|r| r.fields != first.fields) {
            return Err(Error::DocumentMismatch("runs use different field sets".into()));
        }
        let n = reports.len() as f64;
        let per_field = (0..first.fields.len())
            .map(|f| {
                let mut counts = Counts::default();
                reports.iter().for_each(|r| counts.add(r.per_field[f].counts));
                FieldScore {
                    precision: reports.iter().map(|r| r.per_field[f].precision).sum::<f64>() / n,
                    recall: reports.iter().map(|r| r.per_field[f].recall).sum::<f64>() / n,
                    f1: reports.iter().map(|r| r.per_field[f].f1).sum::<f64>() / n,
                    counts,
                }
            })
            .collect();
        let runs = reports.iter().map(|r| r.runs).sum();
        Ok(EvalReport::from_scores(first.fields.clone(), per_field, runs))
    }
}

fn doc_counts(pred: &[SlotPrediction], gold: &[SlotPrediction], field: usize, mode: MatchMode) -> Counts {
    let p: Vec<&SlotPrediction> = pred.iter().filter(|s| s.field == field).collect();
    let g: Vec<&SlotPrediction> = gold.iter().filter(|s| s.field == field).collect();
    match mode {
        MatchMode::OnePerSlot => {
            let produced = !p.is_empty();
            Counts {
                produced: produced as usize,
                total: !g.is_empty() as usize,
                correct: (produced && p.iter().any(|x| g.iter().any(|y| x.text == y.text))) as usize,
            }
        }
        MatchMode::PerOccurrence => {
            let mut spans: Vec<(usize, usize)> = p.iter().map(|s| (s.start, s.end)).collect();
            spans.sort_unstable();
            spans.dedup();
            Counts {
                produced: p.len(),
                total: g.len(),
                correct: spans.iter().filter(|&&(a, b)| g.iter().any(|y| (y.start, y.end) == (a, b))).count(),
            }
        }
    }
}

/// Score per-document predictions against per-document gold slots.
pub fn score(
    predictions: &[Vec<SlotPrediction>],
    gold: &[Vec<SlotPrediction>],
    fields: &FieldSet,
    mode: MatchMode,
) -> Result<EvalReport> {
    if predictions.len() != gold.len() {
        return Err(Error::DocumentMismatch(format!(
            "{} predicted documents, {} gold documents",
            predictions.len(),
            gold.len()
        )));
    }
    let per_field = (0..fields.len())
        .map(|f| {
            let mut counts = Counts::default();
            for (p, g) in predictions.iter().zip(gold) {
                counts.add(doc_counts(p, g, f, mode));
            }
            FieldScore::from_counts(counts)
        })
        .collect();
    Ok(EvalReport::from_scores(fields.clone(), per_field, 1))
}
