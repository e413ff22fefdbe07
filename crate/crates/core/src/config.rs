//! Run configuration: a plain `key = value` file, one setting per line.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::corpus::{Document, FieldSet, SplitPlan};
use crate::error::{Error, Result};
use crate::eval::{ExperimentConfig, MatchMode};
use crate::features::{missing_columns, FeatureMask, GazetteerParams, LexiconSet};
use crate::learning::TrainConfig;

/// `auto` drops annotation-column features the corpus does not carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskSpec {
    Auto,
    Fixed(FeatureMask),
}

impl MaskSpec {
    pub fn resolve(self, corpus: &[Document]) -> FeatureMask {
        match self {
            MaskSpec::Fixed(m) => m,
            MaskSpec::Auto => corpus
                .iter()
                .flat_map(missing_columns)
                .fold(FeatureMask::all(), |m, f| m.without(f)),
        }
    }
}

impl FromStr for MaskSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            Ok(MaskSpec::Auto)
        } else {
            FeatureMask::parse(s).map(MaskSpec::Fixed)
        }
    }
}

impl fmt::Display for MaskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskSpec::Auto => f.write_str("auto"),
            MaskSpec::Fixed(m) => m.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    /// Model directory (model file plus gazetteer).
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub pins: Option<PathBuf>,
    pub fields: FieldSet,
    pub mask: MaskSpec,
    pub seed: u64,
    pub train_frac: f64,
    /// Cross-validation folds; 0 selects a holdout split.
    pub folds: usize,
    pub runs: usize,
    pub alpha: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub jitter: f64,
    pub memory: bool,
    pub match_mode: MatchMode,
    pub window: usize,
    pub min_freq: usize,
    pub max_size: usize,
    /// Worker threads; 0 means one per processor.
    pub jobs: usize,
    pub strict: bool,
    pub tolerant_columns: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let gaz = GazetteerParams::default();
        RunConfig {
            corpus: None,
            lexicons: None,
            model: None,
            out: None,
            pins: None,
            fields: FieldSet::default(),
            mask: MaskSpec::Auto,
            seed: 0,
            train_frac: 0.8,
            folds: 0,
            runs: 5,
            alpha: train.alpha,
            max_iter: train.max_iterations,
            rel_tol: train.rel_tolerance,
            jitter: train.jitter,
            memory: true,
            match_mode: MatchMode::OnePerSlot,
            window: gaz.window,
            min_freq: gaz.min_freq,
            max_size: gaz.max_size,
            jobs: 0,
            strict: false,
            tolerant_columns: false,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad value `{raw}` for `{key}`"),
    })
}

fn path(raw: &str) -> Option<PathBuf> {
    (!raw.is_empty()).then(|| PathBuf::from(raw))
}

fn show(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected key = value".into(),
            })?;
            cfg.set(key.trim(), val.trim(), i + 1)?;
        }
        Ok(cfg)
    }

    /// Assign one setting from its textual form.
    pub fn set(&mut self, key: &str, val: &str, line: usize) -> Result<()> {
        match key {
            "corpus" => self.corpus = path(val),
            "lexicons" => self.lexicons = path(val),
            "model" => self.model = path(val),
            "out" => self.out = path(val),
            "pins" => self.pins = path(val),
            "fields" => self.fields = FieldSet::parse(val)?,
            "mask" => self.mask = val.parse()?,
            "seed" => self.seed = value(key, val, line)?,
            "train_frac" => self.train_frac = value(key, val, line)?,
            "folds" => self.folds = value(key, val, line)?,
            "runs" => self.runs = value(key, val, line)?,
            "alpha" => self.alpha = value(key, val, line)?,
            "max_iter" => self.max_iter = value(key, val, line)?,
            "rel_tol" => self.rel_tol = value(key, val, line)?,
            "jitter" => self.jitter = value(key, val, line)?,
            "memory" => self.memory = value(key, val, line)?,
            "match_mode" => self.match_mode = val.parse()?,
            "window" => self.window = value(key, val, line)?,
            "min_freq" => self.min_freq = value(key, val, line)?,
            "max_size" => self.max_size = value(key, val, line)?,
            "jobs" => self.jobs = value(key, val, line)?,
            "strict" => self.strict = value(key, val, line)?,
            "tolerant_columns" => self.tolerant_columns = value(key, val, line)?,
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key `{key}`"),
                })
            }
        }
        Ok(())
    }

    pub fn plan(&self) -> SplitPlan {
        if self.folds > 0 {
            SplitPlan::kfold(self.folds, self.runs, self.seed)
        } else {
            SplitPlan::holdout(self.train_frac, self.runs, self.seed)
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            max_iterations: self.max_iter,
            rel_tolerance: self.rel_tol,
            alpha: self.alpha,
            seed: self.seed,
            jitter: self.jitter,
            ..TrainConfig::default()
        }
    }

    pub fn lexicon_set(&self) -> Result<LexiconSet> {
        match &self.lexicons {
            Some(dir) => LexiconSet::load_dir(dir),
            None => Ok(LexiconSet::builtin()),
        }
    }

    /// Experiment settings for `corpus`; pins are left to the caller.
    pub fn experiment(&self, corpus: &[Document]) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            fields: self.fields.clone(),
            mask: self.mask.resolve(corpus),
            memory: self.memory,
            train: self.train_config(),
            gazetteer: GazetteerParams {
                window: self.window,
                min_freq: self.min_freq,
                max_size: self.max_size,
            },
            match_mode: self.match_mode,
            lexicons: self.lexicon_set()?,
            ..ExperimentConfig::default()
        })
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "corpus = {}", show(&self.corpus))?;
        writeln!(f, "lexicons = {}", show(&self.lexicons))?;
        writeln!(f, "model = {}", show(&self.model))?;
        writeln!(f, "out = {}", show(&self.out))?;
        writeln!(f, "pins = {}", show(&self.pins))?;
        writeln!(f, "fields = {}", self.fields.names().join(","))?;
        writeln!(f, "mask = {}", self.mask)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "train_frac = {:?}", self.train_frac)?;
        writeln!(f, "folds = {}", self.folds)?;
        writeln!(f, "runs = {}", self.runs)?;
        writeln!(f, "alpha = {:?}", self.alpha)?;
        writeln!(f, "max_iter = {}", self.max_iter)?;
        writeln!(f, "rel_tol = {:?}", self.rel_tol)?;
        writeln!(f, "jitter = {:?}", self.jitter)?;
        writeln!(f, "memory = {}", self.memory)?;
        writeln!(f, "match_mode = {}", self.match_mode)?;
        writeln!(f, "window = {}", self.window)?;
        writeln!(f, "min_freq = {}", self.min_freq)?;
        writeln!(f, "max_size = {}", self.max_size)?;
        writeln!(f, "jobs = {}", self.jobs)?;
        writeln!(f, "strict = {}", self.strict)?;
        writeln!(f, "tolerant_columns = {}", self.tolerant_columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            corpus: Some("data/seminars".into()),
            mask: "no-pos,no-chunk".parse().unwrap(),
            alpha: 0.3,
            rel_tol: 1e-7,
            match_mode: MatchMode::PerOccurrence,
            fields: FieldSet::parse("stime,etime").unwrap(),
            ..RunConfig::default()
        };
        let text = cfg.to_string();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        assert_eq!(RunConfig::parse(&text).unwrap().to_string(), text);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(RunConfig::parse("colour = red"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(RunConfig::parse("# c\nruns = many"), Err(Error::Parse { line: 2, .. })));
        assert!(RunConfig::parse("no equals sign").is_err());
    }
}
