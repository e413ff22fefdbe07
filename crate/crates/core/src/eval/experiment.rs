use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{assemble_slots, decode, gold_slots, score, EvalReport, MatchMode, SlotPrediction};
use crate::corpus::{split, Document, FieldSet, SplitPlan};
use crate::error::{Error, Result};
use crate::features::{featurize, observable_declarations, Feature, FeatureMask, Gazetteer, GazetteerParams, LemmaTable, LexiconSet};
use crate::learning::{parse_pins, train, TrainConfig, TrainingDoc};
use crate::model::{BienModel, CompiledChain, Cpt};

/// Everything needed to train and score one configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub fields: FieldSet,
    pub mask: FeatureMask,
    /// Condition Tag on LastTarget.
    pub memory: bool,
    pub train: TrainConfig,
    pub gazetteer: GazetteerParams,
    pub match_mode: MatchMode,
    pub lexicons: LexiconSet,
    pub lemmas: LemmaTable,
    /// Pin rules, parsed against each freshly built model.
    pub pin_rules: Option<String>,
    /// Pretrained tables copied into the model and kept fixed.
    pub frozen_tables: Vec<Cpt>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            fields: FieldSet::default(),
            mask: FeatureMask::all(),
            memory: true,
            train: TrainConfig::default(),
            gazetteer: GazetteerParams::default(),
            match_mode: MatchMode::OnePerSlot,
            lexicons: LexiconSet::builtin(),
            lemmas: LemmaTable::builtin(),
            pin_rules: None,
            frozen_tables: Vec::new(),
        }
    }
}

/// A trained model with the gazetteer its lemma observable refers to.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: BienModel,
    pub gazetteer: Gazetteer,
    pub trace: Vec<f64>,
}

impl ExperimentConfig {
    /// Build the gazetteer from `docs` and fit a model on them.
    pub fn fit(&self, docs: &[&Document]) -> Result<TrainedModel> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus("no training documents".into()));
        }
        let gazetteer = Gazetteer::build(docs, self.lemmas.clone(), self.gazetteer)?;
        let mut model = BienModel::build(self.fields.clone(), &observable_declarations(&gazetteer), self.train.alpha, self.memory)?;
        model.enabled = Feature::ALL.iter().map(|&f| self.mask.contains(f)).collect();
        let mut train_cfg = self.train.clone();
        for table in &self.frozen_tables {
            let slot = model
                .cpt_mut(&table.name)
                .ok_or_else(|| Error::Config(format!("no table `{}` to freeze", table.name)))?;
            if !slot.same_shape(table) {
                return Err(Error::Validation(format!("pretrained table `{}` has a different shape", table.name)));
            }
            *slot = table.clone();
            train_cfg.frozen.push(table.name.clone());
        }
        if let Some(rules) = &self.pin_rules {
            train_cfg.pins.extend(parse_pins(rules, &model)?);
        }
        let training: Vec<TrainingDoc> = docs
            .par_iter()
            .map(|d| {
                let vectors = featurize(d, &gazetteer, &self.lexicons, self.mask)?;
                TrainingDoc::from_document(d, &vectors)
            })
            .collect::<Result<_>>()?;
        let (model, trace) = train(&model, &training, &train_cfg)?;
        Ok(TrainedModel { model, gazetteer, trace })
    }

    /// Decode `docs` and assemble their slots. Also returns the number of
    /// ill-formed runs that had to be salvaged.
    pub fn predict(&self, trained: &TrainedModel, docs: &[&Document]) -> Result<(Vec<Vec<SlotPrediction>>, usize)> {
        let chain = CompiledChain::compile(&trained.model, &trained.model.enabled)?;
        let out: Vec<(Vec<SlotPrediction>, usize)> = docs
            .par_iter()
            .map(|d| {
                let vectors = featurize(d, &trained.gazetteer, &self.lexicons, self.mask)?;
                let obs: Vec<_> = vectors.iter().map(|v| v.to_observation()).collect();
                let tags = decode(&chain, &obs)?;
                Ok(assemble_slots(&tags, &d.tokens))
            })
            .collect::<Result<_>>()?;
        let ill = out.iter().map(|(_, n)| n).sum();
        Ok((out.into_iter().map(|(s, _)| s).collect(), ill))
    }

    pub fn evaluate(&self, trained: &TrainedModel, docs: &[&Document]) -> Result<(EvalReport, usize)> {
        let (pred, ill) = self.predict(trained, docs)?;
        let gold: Vec<Vec<SlotPrediction>> = docs.iter().map(|d| gold_slots(d)).collect();
        Ok((score(&pred, &gold, &self.fields, self.match_mode)?, ill))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: EvalReport,
    pub trace: Vec<f64>,
    pub ill_formed: usize,
    pub train_docs: usize,
    pub test_docs: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub average: EvalReport,
    pub runs: Vec<RunOutcome>,
}

fn pick<'a>(corpus: &'a [Document], idx: &[usize]) -> Vec<&'a Document> {
    idx.iter().map(|&i| &corpus[i]).collect()
}

/// Train and score once per partition of `plan`; runs execute in parallel
/// and are reported in plan order.
pub fn run_experiment(corpus: &[Document], plan: &SplitPlan, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus("no documents".into()));
    }
    let parts = split(corpus.len(), plan)?;
    let runs: Vec<RunOutcome> = parts
        .par_iter()
        .map(|p| {
            let train_docs = pick(corpus, &p.train);
            let test_docs = pick(corpus, &p.test);
            let trained = cfg.fit(&train_docs)?;
            let (report, ill_formed) = cfg.evaluate(&trained, &test_docs)?;
            Ok(RunOutcome {
                report,
                trace: trained.trace,
                ill_formed,
                train_docs: train_docs.len(),
                test_docs: test_docs.len(),
            })
        })
        .collect::<Result<_>>()?;
    let reports: Vec<EvalReport> = runs.iter().map(|r| r.report.clone()).collect();
    Ok(ExperimentResult {
        average: EvalReport::average(&reports)?,
        runs,
    })
}

/// Rows of the feature-ablation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    Complete,
    NoSemantic,
    NoMemory,
    NoLemma,
    NoLength,
    NoCase,
}

impl Ablation {
    pub const ALL: [Ablation; 6] = [
        Ablation::Complete,
        Ablation::NoSemantic,
        Ablation::NoMemory,
        Ablation::NoLemma,
        Ablation::NoLength,
        Ablation::NoCase,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Ablation::Complete => "complete",
            Ablation::NoSemantic => "no semantic",
            Ablation::NoMemory => "no memory",
            Ablation::NoLemma => "no lemma",
            Ablation::NoLength => "no length",
            Ablation::NoCase => "no case",
        }
    }

    pub fn apply(self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = base.clone();
        match self {
            Ablation::Complete => {}
            Ablation::NoSemantic => cfg.mask = cfg.mask.without(Feature::Semantic),
            Ablation::NoMemory => cfg.memory = false,
            Ablation::NoLemma => cfg.mask = cfg.mask.without(Feature::Lemma),
            Ablation::NoLength => cfg.mask = cfg.mask.without(Feature::Length),
            Ablation::NoCase => cfg.mask = cfg.mask.without(Feature::Case),
        }
        cfg
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn ablation_grid(
    corpus: &[Document],
    plan: &SplitPlan,
    base: &ExperimentConfig,
    rows: &[Ablation],
) -> Result<Vec<(Ablation, ExperimentResult)>> {
    rows.iter()
        .map(|&a| Ok((a, run_experiment(corpus, plan, &a.apply(base))?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub fraction: f64,
    /// Means over runs of the macro-averaged figures.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Learning curve. Each run holds out a fixed 20% test set; a model is
/// trained on the first `round(fraction * corpus size)` documents of a
/// seeded shuffle of the remaining 80%, so training sets are nested.
pub fn learning_curve(
    corpus: &[Document],
    fractions: &[f64],
    runs: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<Vec<CurvePoint>> {
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 0.8)) {
        return Err(Error::InvalidPlan(format!("curve fraction {f} outside (0, 0.8]")));
    }
    let parts = split(corpus.len(), &SplitPlan::holdout(0.8, runs, seed))?;
    let jobs: Vec<(usize, usize)> = (0..parts.len()).flat_map(|r| (0..fractions.len()).map(move |f| (r, f))).collect();
    let results: Vec<EvalReport> = jobs
        .par_iter()
        .map(|&(r, f)| {
            let mut pool = parts[r].train.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64 + 1);
            pool.shuffle(&mut rng);
            let k = ((fractions[f] * corpus.len() as f64).round() as usize).clamp(1, pool.len());
            let trained = cfg.fit(&pick(corpus, &pool[..k]))?;
            Ok(cfg.evaluate(&trained, &pick(corpus, &parts[r].test))?.0)
        })
        .collect::<Result<_>>()?;
    Ok(fractions
        .iter()
        .enumerate()
        .map(|(f, &fraction)| {
            let here: Vec<&EvalReport> = (0..parts.len()).map(|r| &results[r * fractions.len() + f]).collect();
            let n = here.len() as f64;
            CurvePoint {
                fraction,
                precision: here.iter().map(|r| r.macro_avg.precision).sum::<f64>() / n,
                recall: here.iter().map(|r| r.macro_avg.recall).sum::<f64>() / n,
                f1: here.iter().map(|r| r.macro_avg.f1).sum::<f64>() / n,
            }
        })
        .collect())
}
