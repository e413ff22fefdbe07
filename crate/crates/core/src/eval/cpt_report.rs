use std::fmt;

use crate::corpus::FieldSet;
use crate::model::{BienModel, LastTarget, Segment, SubTag, TagState};

/// Field-level view of the Tag transition: entry `(I, J)` is the
/// probability that the next slot has field `J` given the last slot had
/// field `I` (row 0 is "no slot yet").
#[derive(Debug, Clone, PartialEq)]
pub struct CptReport {
    pub fields: FieldSet,
    pub rows: Vec<Vec<f64>>,
}

/// Stationary distribution of the segment chain; falls back to the initial
/// distribution when the chain has no unique one.
fn segment_weights(model: &BienModel) -> [f64; 2] {
    let a = model.p_segment(Segment::Header, Segment::Body);
    let b = model.p_segment(Segment::Body, Segment::Header);
    if a + b > 0.0 {
        [b / (a + b), a / (a + b)]
    } else {
        [model.p_segment_initial(Segment::Header), model.p_segment_initial(Segment::Body)]
    }
}

/// Marginalize sub-states and segments out of `P(Tag | TagPrev = BG,
/// LastTarget, DS)`. A slot of field `J` opens with `B(J)` or `S(J)`; the
/// mass is normalized over all slot openings and segments are weighted by
/// the stationary distribution.
pub fn report_cpt(model: &BienModel) -> CptReport {
    let n = model.fields.len();
    let w = segment_weights(model);
    let rows = (0..=n)
        .map(|l| {
            let last = LastTarget::from_index(l);
            let mut open = vec![0.0; n];
            for ds in Segment::ALL {
                for (j, slot) in open.iter_mut().enumerate() {
                    for sub in [SubTag::Begin, SubTag::Single] {
                        let tag = TagState::Field { field: j, sub };
                        *slot += w[ds.index()] * model.p_tag(TagState::Background, last, ds, tag);
                    }
                }
            }
            let z: f64 = open.iter().sum();
            if z > 0.0 {
                open.iter_mut().for_each(|p| *p /= z);
            }
            open
        })
        .collect();
    CptReport {
        fields: model.fields.clone(),
        rows,
    }
}

/// Round to hundredths so that each row still sums to exactly 1.00
/// (largest remainder).
pub fn round_row(row: &[f64]) -> Vec<u32> {
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        return vec![0; row.len()];
    }
    let scaled: Vec<f64> = row.iter().map(|p| p / total * 100.0).collect();
    let mut cents: Vec<u32> = scaled.iter().map(|x| x.floor() as u32).collect();
    let missing = 100 - cents.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(missing as usize) {
        cents[i] += 1;
    }
    cents
}

impl fmt::Display for CptReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.fields.names().iter().map(String::len).max().unwrap_or(4).max(6);
        write!(f, "{:<width$}", "")?;
        for name in self.fields.names() {
            write!(f, " {name:>width$}")?;
        }
        writeln!(f)?;
        for (l, row) in self.rows.iter().enumerate() {
            write!(f, "{:<width$}", LastTarget::from_index(l).label(&self.fields))?;
            for c in round_row(row) {
                let cell = if c == 100 { "1.00".to_string() } else { format!(".{c:02}") };
                write!(f, " {cell:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_model_gives_uniform_rows() {
        let m = BienModel::build(FieldSet::default(), &[("a".into(), 2)], 0.1, true).unwrap();
        let r = report_cpt(&m);
        assert_eq!(r.rows.len(), 5);
        for row in &r.rows {
            for p in row {
                assert!((p - 0.25).abs() < 1e-12);
            }
        }
        let text = r.to_string();
        assert!(text.lines().nth(1).unwrap().starts_with("none"));
        assert!(text.contains(".25"));
    }

    #[test]
    fn rounding_keeps_rows_at_one() {
        for row in [[0.333, 0.333, 0.334, 0.0], [0.125, 0.125, 0.375, 0.375], [0.66, 0.0, 0.01, 0.33]] {
            assert_eq!(round_row(&row).iter().sum::<u32>(), 100);
        }
        assert_eq!(round_row(&[0.66, 0.0, 0.01, 0.33]), vec![66, 0, 1, 33]);
    }
}
