//! Per-token annotation columns produced by external taggers.
//!
//! File format: one token per line, `surface<TAB>pos<TAB>chunk`, with a blank
//! line between documents. Missing trailing columns are allowed; `NA` marks an
//! absent value.

use std::collections::BTreeMap;

use super::document::{Document, NA};
use crate::error::{Error, Result};

pub const COLUMN_NAMES: [&str; 2] = ["pos", "chunk"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRow {
    pub surface: String,
    pub values: Vec<String>,
}

/// The rows of one document.
pub type ColumnBlock = Vec<ColumnRow>;

pub fn parse_column_file(text: &str) -> Result<Vec<ColumnBlock>> {
    let mut blocks = Vec::new();
    let mut current = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut parts = line.split('\t');
        let surface = parts.next().unwrap_or_default().to_string();
        if surface.is_empty() {
            return Err(Error::Parse {
                line: n + 1,
                message: "empty surface".into(),
            });
        }
        let values: Vec<String> = parts.map(str::to_string).collect();
        if values.len() > COLUMN_NAMES.len() {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected at most {} tab-separated fields", COLUMN_NAMES.len() + 1),
            });
        }
        current.push(ColumnRow { surface, values });
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    Ok(blocks)
}

pub fn write_column_block(doc: &Document) -> String {
    let mut out = String::new();
    for (i, tok) in doc.tokens.iter().enumerate() {
        out.push_str(&tok.surface);
        for name in COLUMN_NAMES {
            out.push('\t');
            out.push_str(doc.columns.get(name).map(|c| c[i].as_str()).unwrap_or(NA));
        }
        out.push('\n');
    }
    out
}

fn column_index(name: &str) -> Result<usize> {
    COLUMN_NAMES
        .iter()
        .position(|c| *c == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Map each document token to the annotation row it aligns with.
fn align(doc: &Document, rows: &[ColumnRow], tolerant: bool) -> Result<Vec<usize>> {
    let strict_ok = rows.len() == doc.tokens.len()
        && rows.iter().zip(&doc.tokens).all(|(r, t)| r.surface == t.surface);
    if strict_ok {
        return Ok((0..rows.len()).collect());
    }
    if !tolerant {
        let index = rows
            .iter()
            .zip(&doc.tokens)
            .position(|(r, t)| r.surface != t.surface)
            .unwrap_or(rows.len().min(doc.tokens.len()));
        return Err(Error::Alignment {
            index,
            expected: doc.tokens.get(index).map(|t| t.surface.clone()),
            found: rows.get(index).map(|r| r.surface.clone()),
        });
    }

    // Re-tokenize: align on the stream of non-whitespace characters.
    let mut owner = Vec::new();
    let mut stream = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        for c in row.surface.chars().filter(|c| !c.is_whitespace()) {
            stream.push(c);
            owner.push(r);
        }
    }
    let mut mapping = Vec::with_capacity(doc.tokens.len());
    let mut pos = 0;
    for (i, tok) in doc.tokens.iter().enumerate() {
        let first = pos;
        for c in tok.surface.chars().filter(|c| !c.is_whitespace()) {
            if stream.get(pos) != Some(&c) {
                return Err(Error::Alignment {
                    index: i,
                    expected: Some(tok.surface.clone()),
                    found: owner.get(pos).map(|&r| rows[r].surface.clone()),
                });
            }
            pos += 1;
        }
        mapping.push(owner[first]);
    }
    if pos != stream.len() {
        return Err(Error::Alignment {
            index: doc.tokens.len(),
            expected: None,
            found: Some(rows[owner[pos]].surface.clone()),
        });
    }
    Ok(mapping)
}

/// Attach the requested columns of `rows` to `doc`.
pub fn load_columns(doc: &Document, rows: &[ColumnRow], requested: &[&str], tolerant: bool) -> Result<Document> {
    let indices: Vec<usize> = requested.iter().map(|n| column_index(n)).collect::<Result<_>>()?;
    for (&name, &k) in requested.iter().zip(&indices) {
        if !rows.is_empty() && rows.iter().all(|r| r.values.len() <= k) {
            return Err(Error::MissingColumn(name.to_string()));
        }
    }
    let mapping = align(doc, rows, tolerant)?;
    let mut out = doc.clone();
    let mut columns = BTreeMap::new();
    for (&name, &k) in requested.iter().zip(&indices) {
        let values = mapping
            .iter()
            .map(|&r| {
                rows[r]
                    .values
                    .get(k)
                    .filter(|v| !v.is_empty())
                    .cloned()
                    .unwrap_or_else(|| NA.to_string())
            })
            .collect();
        columns.insert(name.to_string(), values);
    }
    out.columns.extend(columns);
    Ok(out)
}
