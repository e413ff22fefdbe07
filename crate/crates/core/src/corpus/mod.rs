//! Corpus ingestion: tokenization, inline-tag parsing, annotation columns and
//! train/test partitioning.

mod columns;
mod document;
mod split;
mod token;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use columns::{load_columns, parse_column_file, write_column_block, ColumnBlock, ColumnRow, COLUMN_NAMES};
pub use document::{
    lint_spans, parse_tagged_document, serialize_tagged, Document, FieldSet, LintIssue, ParseOptions,
    ParsedDocument, TagSpan, NA,
};
pub use split::{split, Partition, SplitMode, SplitPlan};
pub use token::{classify, tokenize, Abbreviations, Token, TokenKind};

use crate::error::{Error, Result};

/// A parsed corpus file with its lint findings.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub parsed: ParsedDocument,
}

fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir.display().to_string(), e))?;
        let path = entry.path();
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if path.is_file() && !name.starts_with('.') && !name.ends_with(".cols") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Load every file of `dir` (sorted by name) as an inline-tagged document.
///
/// When a sibling `<file>.cols` exists, its first block is attached as the
/// `pos`/`chunk` columns.
pub fn load_corpus_dir(dir: &Path, opts: &ParseOptions<'_>, tolerant_columns: bool) -> Result<Vec<CorpusEntry>> {
    let files = list_files(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyCorpus(dir.display().to_string()));
    }
    files
        .par_iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
            let raw = String::from_utf8_lossy(&bytes);
            let id = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let mut parsed = parse_tagged_document(&id, &raw, opts)?;
            let cols_path = path.with_file_name(format!("{id}.cols"));
            if cols_path.is_file() {
                let text = fs::read_to_string(&cols_path)
                    .map_err(|e| Error::io(cols_path.display().to_string(), e))?;
                let blocks = parse_column_file(&text)?;
                let rows: Vec<ColumnRow> = blocks.into_iter().flatten().collect();
                let have: Vec<&str> = COLUMN_NAMES
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| rows.iter().any(|r| r.values.len() > *k))
                    .map(|(_, n)| *n)
                    .collect();
                parsed.document = load_columns(&parsed.document, &rows, &have, tolerant_columns)?;
            }
            Ok(CorpusEntry {
                path: path.clone(),
                parsed,
            })
        })
        .collect()
}
