//! The two-slice network: variables, CPTs and the compiled product chain.
//!
//! Hidden variables per token are `Tag` (background or one of B/I/E/S per
//! field), `LastTarget` (field of the last non-background tag, updated
//! deterministically) and `DS` (document segment, header or body). Edges:
//!
//! - `DS_t <- DS_{t-1}`
//! - `Tag_t <- Tag_{t-1}, LastTarget_{t-1}, DS_t` (without `LastTarget` when
//!   memory is disabled)
//! - `obs_k,t <- Tag_t, DS_t` for every observable `k`

mod chain;
mod cpt;
mod io;
mod tags;

pub use chain::{CompiledChain, Edge, ProductState};
pub use cpt::{Cpt, ROW_TOLERANCE};
pub use io::{deserialize, seal, serialize};
pub use tags::{spans_from_tags, tag_count, LastTarget, Segment, SubTag, TagState};

use crate::corpus::FieldSet;
use crate::error::{Error, Result};

/// One token's observed values, one slot per declared observable; `None`
/// means unobserved.
pub type Observation = Vec<Option<u32>>;

pub const SEGMENT_INITIAL: &str = "DS0";
pub const SEGMENT_TRANSITION: &str = "DS";
pub const TAG_INITIAL: &str = "Tag0";
pub const TAG_TRANSITION: &str = "Tag";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observable {
    pub name: String,
    pub cardinality: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BienModel {
    pub fields: FieldSet,
    pub observables: Vec<Observable>,
    /// Observables used at compile time by default.
    pub enabled: Vec<bool>,
    /// Whether `Tag_t` conditions on `LastTarget_{t-1}`.
    pub memory: bool,
    pub alpha: f64,
    pub segment_initial: Cpt,
    pub segment_transition: Cpt,
    pub tag_initial: Cpt,
    pub tag_transition: Cpt,
    pub emissions: Vec<Cpt>,
}

impl BienModel {
    /// A uniform model over the structurally allowed values.
    pub fn build(fields: FieldSet, observables: &[(String, usize)], alpha: f64, memory: bool) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidSpec("no target fields".into()));
        }
        for (i, (name, card)) in observables.iter().enumerate() {
            if *card < 2 {
                return Err(Error::InvalidSpec(format!("observable `{name}` has cardinality {card}")));
            }
            if observables[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidSpec(format!("duplicate observable `{name}`")));
            }
            if [SEGMENT_INITIAL, SEGMENT_TRANSITION, TAG_INITIAL, TAG_TRANSITION, "LastTarget", "TagPrev", "DSprev"]
                .contains(&name.as_str())
            {
                return Err(Error::InvalidSpec(format!("observable name `{name}` is reserved")));
            }
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidSpec(format!("smoothing {alpha} must be a finite non-negative number")));
        }
        let n_tags = tag_count(fields.len());
        let n_lt = fields.len() + 1;
        let tag = |i: usize| TagState::from_index(i);

        let segment_initial = Cpt::new(SEGMENT_INITIAL, "DS", vec![], 2, |_, _| true, |_| true);
        let segment_transition =
            Cpt::new(SEGMENT_TRANSITION, "DS", vec![("DSprev".into(), 2)], 2, |_, _| true, |_| true);
        let tag_initial = Cpt::new(
            TAG_INITIAL,
            "Tag",
            vec![("DS".into(), 2)],
            n_tags,
            |_, v| tag(v).can_start(),
            |_| true,
        );
        let tag_transition = if memory {
            Cpt::new(
                TAG_TRANSITION,
                "Tag",
                vec![("TagPrev".into(), n_tags), ("LastTarget".into(), n_lt), ("DS".into(), 2)],
                n_tags,
                |cfg, v| TagState::can_follow(tag(cfg[0]), tag(v)),
                |cfg| match tag(cfg[0]).field() {
                    Some(f) => cfg[1] == f + 1,
                    None => true,
                },
            )
        } else {
            Cpt::new(
                TAG_TRANSITION,
                "Tag",
                vec![("TagPrev".into(), n_tags), ("DS".into(), 2)],
                n_tags,
                |cfg, v| TagState::can_follow(tag(cfg[0]), tag(v)),
                |_| true,
            )
        };
        let emissions = observables
            .iter()
            .map(|(name, card)| {
                Cpt::new(
                    name.clone(),
                    name.clone(),
                    vec![("Tag".into(), n_tags), ("DS".into(), 2)],
                    *card,
                    |_, _| true,
                    |_| true,
                )
            })
            .collect();
        let model = BienModel {
            fields,
            observables: observables
                .iter()
                .map(|(n, c)| Observable {
                    name: n.clone(),
                    cardinality: *c,
                })
                .collect(),
            enabled: vec![true; observables.len()],
            memory,
            alpha,
            segment_initial,
            segment_transition,
            tag_initial,
            tag_transition,
            emissions,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn tag_count(&self) -> usize {
        tag_count(self.fields.len())
    }

    pub fn last_target_count(&self) -> usize {
        self.fields.len() + 1
    }

    pub fn cpts(&self) -> impl Iterator<Item = &Cpt> {
        [&self.segment_initial, &self.segment_transition, &self.tag_initial, &self.tag_transition]
            .into_iter()
            .chain(self.emissions.iter())
    }

    pub fn cpts_mut(&mut self) -> impl Iterator<Item = &mut Cpt> {
        [
            &mut self.segment_initial,
            &mut self.segment_transition,
            &mut self.tag_initial,
            &mut self.tag_transition,
        ]
        .into_iter()
        .chain(self.emissions.iter_mut())
    }

    pub fn cpt(&self, name: &str) -> Option<&Cpt> {
        self.cpts().find(|c| c.name == name)
    }

    pub fn cpt_mut(&mut self, name: &str) -> Option<&mut Cpt> {
        self.cpts_mut().find(|c| c.name == name)
    }

    pub fn observable_index(&self, name: &str) -> Option<usize> {
        self.observables.iter().position(|o| o.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.enabled.len() != self.observables.len() {
            return Err(Error::Validation("enabled flags do not match observables".into()));
        }
        for cpt in self.cpts() {
            cpt.validate()?;
        }
        Ok(())
    }

    pub fn p_segment_initial(&self, ds: Segment) -> f64 {
        self.segment_initial.get(0, ds.index())
    }

    pub fn p_segment(&self, prev: Segment, ds: Segment) -> f64 {
        self.segment_transition.get(prev.index(), ds.index())
    }

    pub fn p_tag_initial(&self, ds: Segment, tag: TagState) -> f64 {
        self.tag_initial.get(ds.index(), tag.index())
    }

    pub fn tag_row(&self, prev: TagState, last: LastTarget, ds: Segment) -> usize {
        if self.memory {
            self.tag_transition.row_index(&[prev.index(), last.index(), ds.index()])
        } else {
            self.tag_transition.row_index(&[prev.index(), ds.index()])
        }
    }

    pub fn p_tag(&self, prev: TagState, last: LastTarget, ds: Segment, tag: TagState) -> f64 {
        self.tag_transition.get(self.tag_row(prev, last, ds), tag.index())
    }

    pub fn emission_row(&self, tag: TagState, ds: Segment) -> usize {
        tag.index() * 2 + ds.index()
    }

    pub fn p_obs(&self, k: usize, tag: TagState, ds: Segment, value: u32) -> f64 {
        self.emissions[k].get(self.emission_row(tag, ds), value as usize)
    }

    /// Human-readable label of `value` for the variable `var`.
    pub fn value_label(&self, var: &str, value: usize) -> String {
        match var {
            "DS" | "DSprev" => Segment::from_index(value).label().to_string(),
            "Tag" | "TagPrev" => TagState::from_index(value).label(&self.fields),
            "LastTarget" => LastTarget::from_index(value).label(&self.fields),
            _ => value.to_string(),
        }
    }

    pub fn parse_value(&self, var: &str, label: &str) -> Option<usize> {
        match var {
            "DS" | "DSprev" => Segment::parse(label).map(Segment::index),
            "Tag" | "TagPrev" => TagState::parse_label(label, &self.fields).map(TagState::index),
            "LastTarget" => {
                if label == "none" {
                    Some(0)
                } else {
                    self.fields.id(label).map(|f| f + 1)
                }
            }
            _ => {
                let k = self.observable_index(var)?;
                label.parse().ok().filter(|&v| v < self.observables[k].cardinality)
            }
        }
    }

    /// Names of the enabled observables.
    pub fn enabled_names(&self) -> Vec<&str> {
        self.observables
            .iter()
            .zip(&self.enabled)
            .filter(|(_, &e)| e)
            .map(|(o, _)| o.name.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs() -> Vec<(String, usize)> {
        vec![("a".into(), 3), ("b".into(), 2)]
    }

    #[test]
    fn cardinalities() {
        let m = BienModel::build(FieldSet::default(), &obs(), 0.1, true).unwrap();
        assert_eq!(m.tag_count(), 17);
        assert_eq!(m.last_target_count(), 5);
        assert_eq!(m.segment_transition.child_card, 2);
        let m1 = BienModel::build(FieldSet::parse("speaker").unwrap(), &obs(), 0.1, true).unwrap();
        assert_eq!(m1.tag_count(), 5);
        assert_eq!(m1.last_target_count(), 2);
    }

    #[test]
    fn invalid_specs() {
        assert!(BienModel::build(FieldSet::default(), &[("a".into(), 1)], 0.1, true).is_err());
        assert!(BienModel::build(FieldSet::default(), &[("a".into(), 2), ("a".into(), 3)], 0.1, true).is_err());
        assert!(BienModel::build(FieldSet::default(), &[("Tag".into(), 2)], 0.1, true).is_err());
        assert!(BienModel::build(FieldSet::default(), &obs(), -1.0, true).is_err());
    }

    #[test]
    fn uniform_rows_over_allowed_values() {
        let m = BienModel::build(FieldSet::default(), &obs(), 0.1, true).unwrap();
        for cpt in m.cpts() {
            for row in 0..cpt.rows() {
                let allowed = cpt.allowed_row(row).iter().filter(|&&a| a).count();
                for v in 0..cpt.child_card {
                    let expected = if cpt.allowed(row, v) { 1.0 / allowed as f64 } else { 0.0 };
                    assert_eq!(cpt.get(row, v), expected);
                }
            }
        }
    }

    #[test]
    fn structural_zeros_in_place() {
        let fields = FieldSet::default();
        let m = BienModel::build(fields.clone(), &obs(), 0.1, true).unwrap();
        let bg = TagState::Background;
        let inside = |f| TagState::Field { field: f, sub: SubTag::Inside };
        let begin = |f| TagState::Field { field: f, sub: SubTag::Begin };
        for ds in Segment::ALL {
            assert_eq!(m.p_tag_initial(ds, inside(0)), 0.0);
            assert_eq!(m.p_tag(bg, LastTarget::NONE, ds, inside(1)), 0.0);
            assert_eq!(m.p_tag(begin(1), LastTarget(Some(1)), ds, inside(2)), 0.0);
            assert!(m.p_tag(begin(1), LastTarget(Some(1)), ds, inside(1)) > 0.0);
        }
        let row = m.tag_row(begin(1), LastTarget(Some(2)), Segment::Body);
        assert!(!m.tag_transition.is_reachable(row));
    }

    #[test]
    fn value_labels_round_trip() {
        let m = BienModel::build(FieldSet::default(), &obs(), 0.1, true).unwrap();
        for var in ["DS", "Tag", "LastTarget", "a"] {
            let card = match var {
                "DS" => 2,
                "Tag" => 17,
                "LastTarget" => 5,
                _ => 3,
            };
            for v in 0..card {
                let label = m.value_label(var, v);
                assert_eq!(m.parse_value(var, &label), Some(v), "{var} {label}");
            }
        }
    }
}
