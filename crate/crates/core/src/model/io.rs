//! Versioned text format for trained models.
//!
//! ```text
//! bien-model v1
//! fields stime,etime,location,speaker
//! memory true
//! alpha 0.1
//! observables lemma:1202 pos:7 chunk:4 semantic:6 case:5 length:6
//! enabled 1 1 1 1 1 1
//! cpt DS0 child=DS parents=
//! row - | 0.5 0.5
//! cpt DS child=DS parents=DSprev
//! row DSprev=Header | 0.9 0.1
//! ...
//! checksum sha256:<hex of every byte above this line>
//! ```
//!
//! Probabilities are written in shortest round-trip form, so a reload is
//! bit-exact.

use sha2::{Digest, Sha256};

use super::{BienModel, Cpt};
use crate::corpus::FieldSet;
use crate::error::{Error, Result};

const MAGIC: &str = "bien-model";
const VERSION: &str = "v1";
const CHECKSUM_PREFIX: &str = "checksum sha256:";

fn digest_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Append the checksum line to a model body.
pub fn seal(body: &str) -> String {
    let mut out = body.to_string();
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    let hex = digest_hex(&out);
    out.push_str(CHECKSUM_PREFIX);
    out.push_str(&hex);
    out.push('\n');
    out
}

fn row_label(model: &BienModel, cpt: &Cpt, row: usize) -> String {
    if cpt.parents.is_empty() {
        return "-".to_string();
    }
    let mut config = vec![0; cpt.parents.len()];
    cpt.decode_row(row, &mut config);
    cpt.parents
        .iter()
        .zip(&config)
        .map(|(p, &v)| format!("{p}={}", model.value_label(p, v)))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn serialize(model: &BienModel) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "fields {}", model.fields);
    let _ = writeln!(out, "memory {}", model.memory);
    let _ = writeln!(out, "alpha {:?}", model.alpha);
    let obs: Vec<String> = model.observables.iter().map(|o| format!("{}:{}", o.name, o.cardinality)).collect();
    let _ = writeln!(out, "observables {}", obs.join(" "));
    let en: Vec<&str> = model.enabled.iter().map(|&e| if e { "1" } else { "0" }).collect();
    let _ = writeln!(out, "enabled {}", en.join(" "));
    for cpt in model.cpts() {
        let _ = writeln!(out, "cpt {} child={} parents={}", cpt.name, cpt.child, cpt.parents.join(","));
        for row in 0..cpt.rows() {
            let vals: Vec<String> = cpt.row(row).iter().map(|p| format!("{p:?}")).collect();
            let _ = writeln!(out, "row {} | {}", row_label(model, cpt, row), vals.join(" "));
        }
    }
    seal(&out)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (n, line) = lines.next().ok_or_else(|| parse_err(0, format!("missing `{key}` line")))?;
    match line.split_once(' ') {
        Some((k, rest)) if k == key => Ok((n, rest.trim())),
        None if line == key => Ok((n, "")),
        _ => Err(parse_err(n, format!("expected `{key}`"))),
    }
}

/// Parse, checksum-verify and validate a model file.
pub fn deserialize(text: &str) -> Result<BienModel> {
    let first = text.lines().next().unwrap_or("");
    match first.split_once(' ') {
        Some((MAGIC, VERSION)) => {}
        Some((MAGIC, v)) => {
            return Err(Error::VersionMismatch {
                expected: VERSION.into(),
                found: v.trim().into(),
            })
        }
        _ => return Err(parse_err(1, "not a bien model file")),
    }
    let pos = text.rfind(CHECKSUM_PREFIX).ok_or(Error::ChecksumMismatch)?;
    let (body, tail) = text.split_at(pos);
    let stated = tail[CHECKSUM_PREFIX.len()..].trim();
    if (!body.is_empty() && !body.ends_with('\n')) || stated != digest_hex(body) {
        return Err(Error::ChecksumMismatch);
    }

    let mut lines = body.lines().enumerate().map(|(i, l)| (i + 1, l)).skip(1);
    let (n, fields) = header(&mut lines, "fields")?;
    let fields = FieldSet::parse(fields).map_err(|e| parse_err(n, e.to_string()))?;
    let (n, memory) = header(&mut lines, "memory")?;
    let memory = memory.parse::<bool>().map_err(|_| parse_err(n, "memory must be true or false"))?;
    let (n, alpha) = header(&mut lines, "alpha")?;
    let alpha = alpha.parse::<f64>().map_err(|_| parse_err(n, "bad alpha"))?;
    let (n, obs) = header(&mut lines, "observables")?;
    let observables = obs
        .split_whitespace()
        .map(|item| {
            let (name, card) = item.split_once(':').ok_or_else(|| parse_err(n, format!("bad observable `{item}`")))?;
            let card = card.parse().map_err(|_| parse_err(n, format!("bad cardinality in `{item}`")))?;
            Ok((name.to_string(), card))
        })
        .collect::<Result<Vec<(String, usize)>>>()?;
    let (n, enabled) = header(&mut lines, "enabled")?;
    let enabled = enabled
        .split_whitespace()
        .map(|f| match f {
            "1" => Ok(true),
            "0" => Ok(false),
            _ => Err(parse_err(n, format!("bad enabled flag `{f}`"))),
        })
        .collect::<Result<Vec<bool>>>()?;

    let mut model = BienModel::build(fields, &observables, alpha, memory)?;
    if enabled.len() != observables.len() {
        return Err(parse_err(n, "enabled flags do not match observables"));
    }
    model.enabled = enabled;

    let names: Vec<String> = model.cpts().map(|c| c.name.clone()).collect();
    for name in names {
        let (n, spec) = header(&mut lines, "cpt")?;
        let mut parts = spec.split_whitespace();
        if parts.next() != Some(name.as_str()) {
            return Err(parse_err(n, format!("expected cpt `{name}`")));
        }
        let expected_parents = model.cpt(&name).map(|c| c.parents.join(",")).unwrap_or_default();
        let declared: Vec<&str> = parts.collect();
        let parents = declared.iter().find_map(|p| p.strip_prefix("parents=")).unwrap_or("");
        if parents != expected_parents {
            return Err(parse_err(n, format!("cpt `{name}` parents `{parents}`, expected `{expected_parents}`")));
        }
        let rows = model.cpt(&name).map_or(0, Cpt::rows);
        for row in 0..rows {
            let (n, line) = header(&mut lines, "row")?;
            let (label, vals) = line.split_once('|').ok_or_else(|| parse_err(n, "row without `|`"))?;
            let want = row_label(&model, model.cpt(&name).expect("listed"), row);
            if label.trim() != want {
                return Err(parse_err(n, format!("row label `{}`, expected `{want}`", label.trim())));
            }
            let vals = vals
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| parse_err(n, format!("bad probability `{v}`"))))
                .collect::<Result<Vec<f64>>>()?;
            model.cpt_mut(&name).expect("listed").set_row(row, &vals)?;
        }
    }
    if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(n, "trailing content"));
    }
    model.validate()?;
    Ok(model)
}
