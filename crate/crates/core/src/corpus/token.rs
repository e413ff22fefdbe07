//! Whitespace and punctuation tokenization with character offsets.

use std::collections::HashSet;

/// Lexical class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
    Symbol,
    Mixed,
}

/// A minimal text unit. `start`/`end` are character (not byte) offsets into
/// the source text, `end` exclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

impl Token {
    pub fn new(surface: impl Into<String>, start: usize) -> Self {
        let surface = surface.into();
        let end = start + surface.chars().count();
        let kind = classify(&surface);
        Token {
            surface,
            start,
            end,
            kind,
        }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

/// Known abbreviations that keep their trailing period. Lookups are
/// case-insensitive.
#[derive(Debug, Clone, Default)]
pub struct Abbreviations {
    entries: HashSet<String>,
}

const DEFAULT_ABBREVIATIONS: &str = include_str!("../../data/abbreviations.txt");

impl Abbreviations {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The shipped abbreviation list.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_ABBREVIATIONS)
    }

    /// One abbreviation per line; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Abbreviations { entries }
    }

    pub fn insert(&mut self, abbreviation: &str) {
        self.entries.insert(abbreviation.to_lowercase());
    }

    pub fn contains(&self, candidate: &str) -> bool {
        self.entries.contains(&candidate.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Punctuation characters that stay inside a token when flanked by
/// alphanumerics (`rich.com`, `1:30`, `e-mail`, `a/b`).
fn attaches_internally(c: char, prev: char, next: char) -> bool {
    match c {
        ',' => prev.is_ascii_digit() && next.is_ascii_digit(),
        '.' | '@' | '/' | ':' | '-' | '_' | '\'' | '&' | '+' | '%' | '~' | '#' | '=' | '?' => {
            prev.is_alphanumeric() && next.is_alphanumeric()
        }
        _ => false,
    }
}

fn is_url_like(chunk: &str) -> bool {
    let lower = chunk.to_ascii_lowercase();
    lower.starts_with("http://")
        || lower.starts_with("https://")
        || lower.starts_with("ftp://")
        || lower.starts_with("mailto:")
}

/// Split `text` into tokens.
///
/// Punctuation becomes separate tokens except for a period closing a known
/// abbreviation, periods and commas inside numbers, and internal punctuation
/// of email addresses, URLs and mixed alphanumeric tokens.
pub fn tokenize(text: &str, abbreviations: &Abbreviations) -> Vec<Token> {
    let mut tokens = Vec::new();
    tokenize_into(text, 0, abbreviations, &mut tokens);
    tokens
}

/// Tokenize `text`, shifting all offsets by `base` characters.
pub(crate) fn tokenize_into(
    text: &str,
    base: usize,
    abbreviations: &Abbreviations,
    out: &mut Vec<Token>,
) {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_chunk(&chars[start..i], base + start, abbreviations, out);
    }
}

fn split_chunk(chunk: &[char], base: usize, abbreviations: &Abbreviations, out: &mut Vec<Token>) {
    let emit = |out: &mut Vec<Token>, from: usize, to: usize| {
        let surface: String = chunk[from..to].iter().collect();
        out.push(Token::new(surface, base + from));
    };

    let mut lo = 0;
    let mut hi = chunk.len();

    while lo < hi && !chunk[lo].is_alphanumeric() {
        emit(out, lo, lo + 1);
        lo += 1;
    }
    if lo == hi {
        return;
    }

    // Peel trailing punctuation, keeping an abbreviation's period.
    let mut trailing = Vec::new();
    while hi > lo && !chunk[hi - 1].is_alphanumeric() {
        if chunk[hi - 1] == '.' {
            let candidate: String = chunk[lo..hi].iter().collect();
            if abbreviations.contains(&candidate) {
                break;
            }
        }
        trailing.push(hi - 1);
        hi -= 1;
    }

    let core: String = chunk[lo..hi].iter().collect();
    if is_url_like(&core) {
        emit(out, lo, hi);
    } else {
        let mut piece = lo;
        let mut j = lo;
        while j < hi {
            let c = chunk[j];
            let keep = c.is_alphanumeric()
                || (j > lo && j + 1 < hi && attaches_internally(c, chunk[j - 1], chunk[j + 1]))
                || (c == '.' && j + 1 == hi && j > piece);
            if keep {
                j += 1;
                continue;
            }
            if piece < j {
                emit(out, piece, j);
            }
            emit(out, j, j + 1);
            j += 1;
            piece = j;
        }
        if piece < hi {
            emit(out, piece, hi);
        }
    }

    for &k in trailing.iter().rev() {
        emit(out, k, k + 1);
    }
}

fn is_punctuation_char(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"' | '(' | ')' | '[' | ']' | '{' | '}' | '-'
            | '`' | '/' | '\u{2018}' | '\u{2019}' | '\u{201c}' | '\u{201d}' | '\u{2013}'
            | '\u{2014}' | '\u{2026}'
    )
}

fn is_abbreviation_shape(s: &str) -> bool {
    // "Dr.", "Exec.", "p.m.", "U.S."
    if !s.ends_with('.') {
        return false;
    }
    let body = &s[..s.len() - 1];
    !body.is_empty()
        && body.chars().next().is_some_and(char::is_alphabetic)
        && body.chars().all(|c| c.is_alphabetic() || c == '.')
        && !body.contains("..")
}

fn is_number_shape(s: &str) -> bool {
    let mut seen_digit = false;
    let mut prev_sep = true;
    for c in s.chars() {
        if c.is_ascii_digit() {
            seen_digit = true;
            prev_sep = false;
        } else if c == '.' || c == ',' {
            if prev_sep {
                return false;
            }
            prev_sep = true;
        } else {
            return false;
        }
    }
    seen_digit && !prev_sep
}

/// Assign a [`TokenKind`] to a surface string.
pub fn classify(surface: &str) -> TokenKind {
    let mut chars = surface.chars();
    let Some(first) = chars.next() else {
        return TokenKind::Symbol;
    };
    if surface.chars().all(char::is_alphabetic) || is_abbreviation_shape(surface) {
        return TokenKind::Word;
    }
    if is_number_shape(surface) {
        return TokenKind::Number;
    }
    if chars.next().is_none() && is_punctuation_char(first) {
        return TokenKind::Punctuation;
    }
    if surface.chars().all(|c| !c.is_alphanumeric()) {
        return TokenKind::Symbol;
    }
    TokenKind::Mixed
}
