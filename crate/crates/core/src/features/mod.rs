//! Token-level discrete features observed by the network.

mod categories;
mod gazetteer;
mod lexicon;

use std::fmt;

pub use categories::{
    case_feature, chunk_flatten, length_feature, pos_cluster, CaseCategory, ChunkCategory, LengthBucket, PosCluster,
    SemanticCategory, PENN_TAGS,
};
pub use gazetteer::{Gazetteer, GazetteerParams, LemmaTable};
pub use lexicon::LexiconSet;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::Observation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Lemma,
    Pos,
    Chunk,
    Semantic,
    Case,
    Length,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::Lemma,
        Feature::Pos,
        Feature::Chunk,
        Feature::Semantic,
        Feature::Case,
        Feature::Length,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Lemma => "lemma",
            Feature::Pos => "pos",
            Feature::Chunk => "chunk",
            Feature::Semantic => "semantic",
            Feature::Case => "case",
            Feature::Length => "length",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// Set of enabled features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureMask(u8);

impl FeatureMask {
    pub const fn all() -> Self {
        FeatureMask(0b11_1111)
    }

    pub const fn none() -> Self {
        FeatureMask(0)
    }

    pub fn contains(self, f: Feature) -> bool {
        self.0 & f.bit() != 0
    }

    pub fn with(self, f: Feature) -> Self {
        FeatureMask(self.0 | f.bit())
    }

    pub fn without(self, f: Feature) -> Self {
        FeatureMask(self.0 & !f.bit())
    }

    pub fn features(self) -> impl Iterator<Item = Feature> {
        Feature::ALL.into_iter().filter(move |f| self.contains(*f))
    }

    /// Accepts `all`, `none`, a comma list of feature names, or a comma list
    /// of `no-<feature>` removals applied to `all`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec {
            "all" | "complete" => return Ok(Self::all()),
            "none" => return Ok(Self::none()),
            _ => {}
        }
        let items: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let lookup = |n: &str| Feature::from_name(n).ok_or_else(|| Error::Config(format!("unknown feature `{n}`")));
        if items.iter().all(|i| i.starts_with("no-")) && !items.is_empty() {
            items
                .iter()
                .try_fold(Self::all(), |m, i| Ok(m.without(lookup(&i[3..])?)))
        } else {
            items.iter().try_fold(Self::none(), |m, i| Ok(m.with(lookup(i)?)))
        }
    }
}

impl Default for FeatureMask {
    fn default() -> Self {
        Self::all()
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::all() {
            return f.write_str("all");
        }
        if *self == Self::none() {
            return f.write_str("none");
        }
        let names: Vec<&str> = self.features().map(Feature::name).collect();
        f.write_str(&names.join(","))
    }
}

/// Per-token feature tuple. `None` marks a masked (unobserved) feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    pub lemma: Option<u32>,
    pub pos: Option<PosCluster>,
    pub chunk: Option<ChunkCategory>,
    pub semantic: Option<SemanticCategory>,
    pub case: Option<CaseCategory>,
    pub length: Option<LengthBucket>,
}

impl FeatureVector {
    /// Zero-based observation value per feature, in [`Feature::ALL`] order.
    pub fn to_observation(&self) -> Observation {
        vec![
            self.lemma.map(|id| id - 1),
            self.pos.map(|v| v.index() as u32),
            self.chunk.map(|v| v.index() as u32),
            self.semantic.map(|v| v.index() as u32),
            self.case.map(|v| v.index() as u32),
            self.length.map(|v| v.index() as u32),
        ]
    }
}

/// Observable declarations (name, cardinality) for the six features.
pub fn observable_declarations(gazetteer: &Gazetteer) -> Vec<(String, usize)> {
    Feature::ALL
        .iter()
        .map(|f| {
            let card = match f {
                Feature::Lemma => gazetteer.cardinality(),
                Feature::Pos => PosCluster::CARDINALITY,
                Feature::Chunk => ChunkCategory::CARDINALITY,
                Feature::Semantic => SemanticCategory::CARDINALITY,
                Feature::Case => CaseCategory::CARDINALITY,
                Feature::Length => LengthBucket::CARDINALITY,
            };
            (f.name().to_string(), card)
        })
        .collect()
}

/// Features whose annotation column is missing from `doc`.
pub fn missing_columns(doc: &Document) -> Vec<Feature> {
    [Feature::Pos, Feature::Chunk]
        .into_iter()
        .filter(|f| doc.column(f.name()).is_none())
        .collect()
}

/// Compute one feature vector per token. Disabled features are `None`.
pub fn featurize(doc: &Document, gaz: &Gazetteer, lex: &LexiconSet, mask: FeatureMask) -> Result<Vec<FeatureVector>> {
    let pos = if mask.contains(Feature::Pos) {
        Some(doc.column("pos").ok_or_else(|| Error::MissingResource("pos".into()))?)
    } else {
        None
    };
    let chunk = if mask.contains(Feature::Chunk) {
        Some(doc.column("chunk").ok_or_else(|| Error::MissingResource("chunk".into()))?)
    } else {
        None
    };
    let out = doc
        .tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| FeatureVector {
            lemma: mask.contains(Feature::Lemma).then(|| gaz.lemmatise(tok)),
            pos: pos.map(|c| pos_cluster(&c[i], false).unwrap_or(PosCluster::Sym)),
            chunk: chunk.map(|c| chunk_flatten(&c[i])),
            semantic: mask.contains(Feature::Semantic).then(|| lex.semantic(tok)),
            case: mask.contains(Feature::Case).then(|| case_feature(tok)),
            length: mask.contains(Feature::Length).then(|| length_feature(tok)),
        })
        .collect();
    Ok(out)
}
