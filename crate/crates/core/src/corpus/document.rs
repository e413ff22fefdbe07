//! Inline-tagged documents: `<field> ... </field>` markup over plain text.

use std::collections::BTreeMap;
use std::fmt;

use super::token::{tokenize_into, Abbreviations, Token, TokenKind};
use crate::error::{Error, Result};

/// Marker for an absent annotation value.
pub const NA: &str = "NA";

/// Ordered set of target fields. A field's id is its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSet {
    names: Vec<String>,
}

impl FieldSet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidSpec("field set is empty".into()));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_lowercase()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::InvalidSpec(format!("invalid field name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidSpec(format!("duplicate field `{n}`")));
            }
        }
        Ok(FieldSet { names })
    }

    /// Comma separated list, e.g. `stime,etime,location,speaker`.
    pub fn parse(list: &str) -> Result<Self> {
        let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        Self::new(&names)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        let name = name.to_lowercase();
        self.names.iter().position(|n| *n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl Default for FieldSet {
    fn default() -> Self {
        FieldSet {
            names: ["stime", "etime", "location", "speaker"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl fmt::Display for FieldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names.join(","))
    }
}

/// A gold slot: tokens `start..=end` belong to `field`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagSpan {
    pub field: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub id: String,
    /// Tag-stripped source text; token offsets index into its characters.
    pub text: String,
    pub tokens: Vec<Token>,
    pub gold_spans: Vec<TagSpan>,
    pub columns: BTreeMap<String, Vec<String>>,
}

impl Document {
    /// Tokenize untagged text.
    pub fn from_text(id: impl Into<String>, text: &str, abbreviations: &Abbreviations) -> Self {
        let mut tokens = Vec::new();
        tokenize_into(text, 0, abbreviations, &mut tokens);
        Document {
            id: id.into(),
            text: text.to_string(),
            tokens,
            gold_spans: Vec::new(),
            columns: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[String]> {
        self.columns.get(name).map(Vec::as_slice)
    }

    /// Filler string for a token range: surfaces joined by single spaces.
    pub fn filler(&self, start: usize, end: usize) -> String {
        self.tokens[start..=end]
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Check span bounds and that no token belongs to two spans.
    pub fn validate_spans(&self) -> Result<()> {
        let mut owner = vec![false; self.tokens.len()];
        for span in &self.gold_spans {
            if span.start > span.end || span.end >= self.tokens.len() {
                return Err(Error::Validation(format!(
                    "span {}..={} out of range in `{}`",
                    span.start, span.end, self.id
                )));
            }
            for (i, slot) in owner.iter_mut().enumerate().take(span.end + 1).skip(span.start) {
                if *slot {
                    return Err(Error::OverlappingSpans {
                        doc: self.id.clone(),
                        token: i,
                    });
                }
                *slot = true;
            }
        }
        Ok(())
    }
}

/// A suspicious construct found while ingesting a tagged file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintIssue {
    pub token: usize,
    pub code: &'static str,
    pub message: String,
}

impl LintIssue {
    /// `file:tokenIndex:code:message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}:{}", self.token, self.code, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions<'a> {
    pub fields: &'a FieldSet,
    pub abbreviations: &'a Abbreviations,
    /// Tags outside the field set are errors rather than lint warnings.
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct ParsedDocument {
    pub document: Document,
    pub issues: Vec<LintIssue>,
}

struct RawTag {
    name: String,
    closing: bool,
    len: usize,
}

/// Recognize `<name>` or `</name>` at the start of `chars`.
fn scan_tag(chars: &[char]) -> Option<RawTag> {
    if chars.first() != Some(&'<') {
        return None;
    }
    let mut i = 1;
    let closing = chars.get(1) == Some(&'/');
    if closing {
        i += 1;
    }
    let first = *chars.get(i)?;
    if !first.is_ascii_alphabetic() {
        return None;
    }
    let name_start = i;
    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
        i += 1;
    }
    if chars.get(i) != Some(&'>') {
        return None;
    }
    Some(RawTag {
        name: chars[name_start..i].iter().collect::<String>().to_lowercase(),
        closing,
        len: i + 1,
    })
}

/// Parse a document with inline field tags. Tags are stripped from the text;
/// each tag pair becomes a gold span over the tokens it enclosed.
pub fn parse_tagged_document(id: &str, raw: &str, opts: &ParseOptions<'_>) -> Result<ParsedDocument> {
    let chars: Vec<char> = raw.chars().collect();
    let mut text = String::with_capacity(raw.len());
    let mut text_len = 0usize;
    let mut line = 1usize;
    // Break points (stripped char offsets) where field tags were.
    let mut breaks = vec![0usize];
    let mut open: Option<(usize, usize, usize, usize)> = None;
    let mut char_spans: Vec<(usize, usize, usize)> = Vec::new();
    let mut issues = Vec::new();
    let mut unknown_tags = Vec::new();

    let mut i = 0;
    while i < chars.len() {
        if let Some(tag) = scan_tag(&chars[i..]) {
            match opts.fields.id(&tag.name) {
                Some(field) => {
                    if tag.closing {
                        match open.take() {
                            Some((f, start, _, _)) if f == field => {
                                char_spans.push((field, start, text_len));
                            }
                            Some((f, _, l, o)) => {
                                return Err(Error::MalformedTag {
                                    line,
                                    offset: i,
                                    message: format!(
                                        "closing </{}> does not match <{}> opened at line {l}, offset {o}",
                                        tag.name,
                                        opts.fields.name(f)
                                    ),
                                });
                            }
                            None => {
                                return Err(Error::MalformedTag {
                                    line,
                                    offset: i,
                                    message: format!("closing </{}> without opening tag", tag.name),
                                });
                            }
                        }
                    } else {
                        if let Some((f, _, l, o)) = open {
                            return Err(Error::MalformedTag {
                                line,
                                offset: i,
                                message: format!(
                                    "<{}> nested inside <{}> opened at line {l}, offset {o}",
                                    tag.name,
                                    opts.fields.name(f)
                                ),
                            });
                        }
                        open = Some((field, text_len, line, i));
                    }
                    breaks.push(text_len);
                }
                None => {
                    if opts.strict {
                        return Err(Error::UnknownField {
                            field: tag.name,
                            line,
                            offset: i,
                        });
                    }
                    unknown_tags.push((text_len, tag.name.clone(), tag.closing));
                }
            }
            i += tag.len;
            continue;
        }
        if chars[i] == '\n' {
            line += 1;
        }
        text.push(chars[i]);
        text_len += 1;
        i += 1;
    }
    if let Some((f, _, l, o)) = open {
        return Err(Error::MalformedTag {
            line: l,
            offset: o,
            message: format!("<{}> is never closed", opts.fields.name(f)),
        });
    }
    breaks.push(text_len);
    breaks.dedup();

    let text_chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    for w in breaks.windows(2) {
        let segment: String = text_chars[w[0]..w[1]].iter().collect();
        tokenize_into(&segment, w[0], opts.abbreviations, &mut tokens);
    }

    let mut gold_spans = Vec::new();
    for (field, cs, ce) in char_spans {
        let first = tokens.partition_point(|t| t.start < cs);
        let last = tokens.partition_point(|t| t.end <= ce);
        if first >= last {
            issues.push(LintIssue {
                token: first,
                code: "empty-span",
                message: format!("<{}> encloses no tokens", opts.fields.name(field)),
            });
            continue;
        }
        gold_spans.push(TagSpan {
            field,
            start: first,
            end: last - 1,
        });
    }
    gold_spans.sort_by_key(|s| s.start);

    for (pos, name, closing) in unknown_tags {
        let token = tokens.partition_point(|t| t.start < pos);
        issues.push(LintIssue {
            token,
            code: "unknown-tag",
            message: format!("<{}{}> ignored", if closing { "/" } else { "" }, name),
        });
    }
    let document = Document {
        id: id.to_string(),
        text,
        tokens,
        gold_spans,
        columns: BTreeMap::new(),
    };
    issues.extend(lint_spans(&document, opts.fields));
    issues.sort_by_key(|i| i.token);
    Ok(ParsedDocument { document, issues })
}

/// Heuristic checks for misplaced gold tags.
pub fn lint_spans(doc: &Document, fields: &FieldSet) -> Vec<LintIssue> {
    let mut issues = Vec::new();
    for span in &doc.gold_spans {
        let name = fields.name(span.field);
        let first = &doc.tokens[span.start];
        let last = &doc.tokens[span.end];
        if first.kind == TokenKind::Punctuation {
            issues.push(LintIssue {
                token: span.start,
                code: "edge-punctuation",
                message: format!("<{name}> starts with `{}`", first.surface),
            });
        }
        if span.end > span.start && last.kind == TokenKind::Punctuation && !last.surface.ends_with(')') {
            issues.push(LintIssue {
                token: span.end,
                code: "edge-punctuation",
                message: format!("<{name}> ends with `{}`", last.surface),
            });
        }
        let len = span.end - span.start + 1;
        if len > 20 {
            issues.push(LintIssue {
                token: span.start,
                code: "long-span",
                message: format!("<{name}> covers {len} tokens"),
            });
        }
        let text_between = doc.text.chars().skip(first.start).take(last.end - first.start);
        if text_between.filter(|&c| c == '\n').count() > 1 {
            issues.push(LintIssue {
                token: span.start,
                code: "multiline-span",
                message: format!("<{name}> crosses several lines"),
            });
        }
    }
    issues
}

/// Re-insert gold spans as inline tags at their token boundaries.
pub fn serialize_tagged(doc: &Document, fields: &FieldSet) -> String {
    let mut opens: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    let mut closes: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for span in &doc.gold_spans {
        let name = fields.name(span.field);
        opens.entry(doc.tokens[span.start].start).or_default().push(name);
        closes.entry(doc.tokens[span.end].end).or_default().push(name);
    }
    let mut out = String::with_capacity(doc.text.len() + 32 * doc.gold_spans.len());
    let n = doc.text.chars().count();
    let mut chars = doc.text.chars();
    for pos in 0..=n {
        if let Some(names) = closes.get(&pos) {
            for name in names {
                out.push_str("</");
                out.push_str(name);
                out.push('>');
            }
        }
        if let Some(names) = opens.get(&pos) {
            for name in names {
                out.push('<');
                out.push_str(name);
                out.push('>');
            }
        }
        if let Some(c) = chars.next() {
            out.push(c);
        }
    }
    out
}
