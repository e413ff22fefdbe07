//! Trained-model bundle: tag raw or column-annotated text.

use std::fs;
use std::path::Path;

use crate::corpus::{Abbreviations, Document, FieldSet};
use crate::error::{Error, Result};
use crate::eval::{assemble_slots, decode, SlotPrediction, TrainedModel};
use crate::features::{featurize, missing_columns, Feature, FeatureMask, Gazetteer, LemmaTable, LexiconSet};
use crate::model::{deserialize, serialize, BienModel, CompiledChain};

pub const MODEL_FILE: &str = "model.bien";
pub const GAZETTEER_FILE: &str = "gazetteer.txt";

/// Mask of the features a model was trained with.
pub fn model_mask(model: &BienModel) -> FeatureMask {
    Feature::ALL
        .iter()
        .zip(&model.enabled)
        .filter(|(_, &on)| on)
        .fold(FeatureMask::none(), |m, (&f, _)| m.with(f))
}

pub struct Extractor {
    model: BienModel,
    gazetteer: Gazetteer,
    lexicons: LexiconSet,
    abbreviations: Abbreviations,
    mask: FeatureMask,
    chain: CompiledChain,
    /// Chain with the annotation columns masked, for plain text.
    text_chain: CompiledChain,
}

impl Extractor {
    pub fn new(model: BienModel, gazetteer: Gazetteer, lexicons: LexiconSet) -> Result<Self> {
        let names: Vec<&str> = model.observables.iter().map(|o| o.name.as_str()).collect();
        let expected: Vec<&str> = Feature::ALL.iter().map(|f| f.name()).collect();
        if names != expected {
            return Err(Error::InvalidSpec(format!("observables {names:?} are not the feature set {expected:?}")));
        }
        if model.observables[0].cardinality != gazetteer.cardinality() {
            return Err(Error::InvalidSpec("gazetteer does not match the lemma observable".into()));
        }
        let mask = model_mask(&model);
        let chain = CompiledChain::compile(&model, &model.enabled)?;
        let text_mask = mask.without(Feature::Pos).without(Feature::Chunk);
        let text_enabled: Vec<bool> = Feature::ALL.iter().map(|&f| text_mask.contains(f)).collect();
        let text_chain = CompiledChain::compile(&model, &text_enabled)?;
        Ok(Extractor {
            model,
            gazetteer,
            lexicons,
            abbreviations: Abbreviations::builtin(),
            mask,
            chain,
            text_chain,
        })
    }

    pub fn from_trained(trained: TrainedModel, lexicons: LexiconSet) -> Result<Self> {
        Self::new(trained.model, trained.gazetteer, lexicons)
    }

    /// Read `model.bien` and `gazetteer.txt` from `dir`.
    pub fn load(dir: &Path, lexicons: LexiconSet) -> Result<Self> {
        let model = deserialize(&read_text(&dir.join(MODEL_FILE))?)?;
        let gazetteer = Gazetteer::parse(&read_text(&dir.join(GAZETTEER_FILE))?, LemmaTable::builtin())?;
        Self::new(model, gazetteer, lexicons)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        save_bundle(dir, &self.model, &self.gazetteer)
    }

    pub fn model(&self) -> &BienModel {
        &self.model
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn fields(&self) -> &FieldSet {
        &self.model.fields
    }

    pub fn mask(&self) -> FeatureMask {
        self.mask
    }

    /// Decode a tokenized document. Annotation columns the document lacks
    /// are treated as unobserved.
    pub fn extract_document(&self, doc: &Document) -> Result<Vec<SlotPrediction>> {
        let missing = missing_columns(doc);
        let (mask, chain) = if missing.iter().any(|&f| self.mask.contains(f)) {
            (self.mask.without(Feature::Pos).without(Feature::Chunk), &self.text_chain)
        } else {
            (self.mask, &self.chain)
        };
        let obs: Vec<_> = featurize(doc, &self.gazetteer, &self.lexicons, mask)?
            .iter()
            .map(|v| v.to_observation())
            .collect();
        Ok(assemble_slots(&decode(chain, &obs)?, &doc.tokens).0)
    }

    pub fn extract(&self, text: &str) -> Result<Vec<SlotPrediction>> {
        self.extract_document(&Document::from_text("input", text, &self.abbreviations))
    }

    /// Predicted slots of `text` located by byte offsets.
    pub fn locate(&self, text: &str) -> Result<Vec<TextSlot>> {
        let doc = Document::from_text("input", text, &self.abbreviations);
        let bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).chain([text.len()]).collect();
        Ok(self
            .extract_document(&doc)?
            .into_iter()
            .map(|s| TextSlot {
                field: s.field,
                start: bytes[doc.tokens[s.start].start],
                end: bytes[doc.tokens[s.end].end],
                text: s.text,
            })
            .collect())
    }

    /// `text` with `<field>` and `</field>` inserted around each predicted
    /// slot. Removing the tags gives back `text` unchanged.
    pub fn tag_text(&self, text: &str) -> Result<String> {
        Ok(insert_tags(text, &self.locate(text)?, &self.model.fields))
    }
}

/// A slot in source text; `start..end` is a byte range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextSlot {
    pub field: usize,
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Write a model and its gazetteer into `dir`, creating it if needed.
pub fn save_bundle(dir: &Path, model: &BienModel, gazetteer: &Gazetteer) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    write_text(&dir.join(MODEL_FILE), &serialize(model))?;
    write_text(&dir.join(GAZETTEER_FILE), &gazetteer.serialize())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn insert_tags(text: &str, slots: &[TextSlot], fields: &FieldSet) -> String {
    let mut out = String::with_capacity(text.len() + slots.len() * 24);
    let mut at = 0;
    for s in slots {
        let name = fields.name(s.field);
        out.push_str(&text[at..s.start]);
        out.push_str(&format!("<{name}>"));
        out.push_str(&text[s.start..s.end]);
        out.push_str(&format!("</{name}>"));
        at = s.end;
    }
    out.push_str(&text[at..]);
    out
}
