//! Prior-knowledge pins: fixed CPT cells excluded from the M-step.
//!
//! One pin per line, `#` starts a comment:
//!
//! ```text
//! Tag|LastTarget=none:B-etime -> 0
//! Tag|TagPrev=BG,LastTarget=stime,DS=*:S-etime -> 0.2
//! ```
//!
//! Parents left out or given as `*` match every value.

use crate::error::{Error, Result};
use crate::model::BienModel;

/// A fixed cell: CPT index in [`BienModel::cpts`] order, row, child value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinnedCell {
    pub cpt: usize,
    pub row: usize,
    pub value: usize,
    pub prob: f64,
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_pins(text: &str, model: &BienModel) -> Result<Vec<PinnedCell>> {
    let mut out: Vec<PinnedCell> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, prob) = line.split_once("->").ok_or_else(|| bad(n, "expected `->`"))?;
        let prob: f64 = prob.trim().parse().map_err(|_| bad(n, format!("bad probability `{}`", prob.trim())))?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(bad(n, format!("probability {prob} outside [0, 1]")));
        }
        let (target, child) = lhs.trim().rsplit_once(':').ok_or_else(|| bad(n, "expected `:<value>`"))?;
        let (name, parents) = target.split_once('|').unwrap_or((target, ""));
        let cpt_index = model
            .cpts()
            .position(|c| c.name == name.trim())
            .ok_or_else(|| bad(n, format!("unknown CPT `{}`", name.trim())))?;
        let cpt = model.cpts().nth(cpt_index).expect("found");
        let value = model
            .parse_value(&cpt.child, child.trim())
            .ok_or_else(|| bad(n, format!("bad value `{}` for `{}`", child.trim(), cpt.child)))?;
        let mut fixed: Vec<Option<usize>> = vec![None; cpt.parents.len()];
        for item in parents.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (var, val) = item.split_once('=').ok_or_else(|| bad(n, format!("bad parent `{item}`")))?;
            let slot = cpt
                .parents
                .iter()
                .position(|p| p == var.trim())
                .ok_or_else(|| bad(n, format!("`{}` is not a parent of `{name}`", var.trim())))?;
            if val.trim() != "*" {
                fixed[slot] = Some(
                    model
                        .parse_value(var.trim(), val.trim())
                        .ok_or_else(|| bad(n, format!("bad value `{}` for `{}`", val.trim(), var.trim())))?,
                );
            }
        }
        let mut config = vec![0; cpt.parents.len()];
        for row in 0..cpt.rows() {
            cpt.decode_row(row, &mut config);
            if fixed.iter().zip(&config).any(|(f, c)| f.is_some_and(|f| f != *c)) {
                continue;
            }
            if !cpt.allowed(row, value) {
                if prob > 0.0 && cpt.is_reachable(row) {
                    return Err(bad(n, format!("pin assigns mass to a structural zero of `{name}`")));
                }
                continue;
            }
            let cell = PinnedCell {
                cpt: cpt_index,
                row,
                value,
                prob,
            };
            match out.iter().find(|p| p.cpt == cpt_index && p.row == row && p.value == value) {
                Some(p) if p.prob != prob => return Err(bad(n, "conflicting pins for the same cell")),
                Some(_) => {}
                None => out.push(cell),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FieldSet;

    fn model() -> BienModel {
        BienModel::build(FieldSet::default(), &[("a".into(), 2)], 0.1, true).unwrap()
    }

    #[test]
    fn wildcards_expand_to_rows() {
        let m = model();
        let pins = parse_pins("# prior\nTag|LastTarget=none:B-etime -> 0\n", &m).unwrap();
        // TagPrev in {BG, E-*, S-*} x DS; only TagPrev=BG is reachable with none, but
        // every allowed cell matches
        assert!(pins.iter().all(|p| p.cpt == 3 && p.prob == 0.0));
        let n_rows_allowed = (0..m.tag_transition.rows())
            .filter(|&r| {
                let mut cfg = [0; 3];
                m.tag_transition.decode_row(r, &mut cfg);
                cfg[1] == 0 && m.tag_transition.allowed(r, 5)
            })
            .count();
        assert_eq!(pins.len(), n_rows_allowed);
    }

    #[test]
    fn errors() {
        let m = model();
        assert!(parse_pins("Tag:B-etime 0", &m).is_err());
        assert!(parse_pins("Nope:BG -> 0", &m).is_err());
        assert!(parse_pins("Tag|Colour=red:BG -> 0", &m).is_err());
        assert!(parse_pins("Tag:BG -> 1.5", &m).is_err());
        assert!(parse_pins("Tag0:I-stime -> 0.5", &m).is_err());
        assert!(parse_pins("Tag0:I-stime -> 0", &m).unwrap().is_empty());
        assert!(parse_pins("DS0:Header -> 0.3\nDS0:Header -> 0.4", &m).is_err());
    }
}
