use crate::model::{BienModel, LastTarget, Segment, TagState};

/// Expected-count accumulators shaped like the model's CPTs, in
/// [`BienModel::cpts`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub tables: Vec<Vec<f64>>,
    child_cards: Vec<usize>,
}

const SEGMENT_INITIAL: usize = 0;
const SEGMENT: usize = 1;
const TAG_INITIAL: usize = 2;
const TAG: usize = 3;
const EMISSIONS: usize = 4;

impl CountTable {
    pub fn zeros(model: &BienModel) -> Self {
        CountTable {
            tables: model.cpts().map(|c| vec![0.0; c.values().len()]).collect(),
            child_cards: model.cpts().map(|c| c.child_card).collect(),
        }
    }

    fn add(&mut self, table: usize, row: usize, value: usize, w: f64) {
        let c = self.child_cards[table];
        self.tables[table][row * c + value] += w;
    }

    pub fn add_segment_initial(&mut self, ds: Segment, w: f64) {
        self.add(SEGMENT_INITIAL, 0, ds.index(), w);
    }

    pub fn add_segment(&mut self, prev: Segment, ds: Segment, w: f64) {
        self.add(SEGMENT, prev.index(), ds.index(), w);
    }

    pub fn add_tag_initial(&mut self, ds: Segment, tag: TagState, w: f64) {
        self.add(TAG_INITIAL, ds.index(), tag.index(), w);
    }

    pub fn add_tag(&mut self, model: &BienModel, prev: TagState, last: LastTarget, ds: Segment, tag: TagState, w: f64) {
        self.add(TAG, model.tag_row(prev, last, ds), tag.index(), w);
    }

    /// Count every observed value of an enabled observable.
    pub fn add_observation(
        &mut self,
        model: &BienModel,
        enabled: &[bool],
        tag: TagState,
        ds: Segment,
        obs: &[Option<u32>],
        w: f64,
    ) {
        let row = model.emission_row(tag, ds);
        for (k, v) in obs.iter().enumerate() {
            if let (true, Some(v)) = (enabled[k], v) {
                self.add(EMISSIONS + k, row, *v as usize, w);
            }
        }
    }

    pub fn merge(&mut self, other: &CountTable) {
        for (a, b) in self.tables.iter_mut().zip(&other.tables) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// Counts of one CPT by name.
    pub fn table<'a>(&'a self, model: &BienModel, name: &str) -> Option<&'a [f64]> {
        let i = model.cpts().position(|c| c.name == name)?;
        Some(&self.tables[i])
    }
}
