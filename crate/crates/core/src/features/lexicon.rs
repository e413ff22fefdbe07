use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::categories::SemanticCategory;
use crate::corpus::{Token, TokenKind};
use crate::error::{Error, Result};

/// Word lists backing the semantic feature.
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    pub titles: HashSet<String>,
    /// Name to frequency rank; smaller is more frequent.
    pub first_names: HashMap<String, u32>,
    pub last_names: HashMap<String, u32>,
    pub location_words: HashSet<String>,
    pub time_words: HashSet<String>,
}

const TITLES: &str = include_str!("../../data/titles.txt");
const FIRST_NAMES: &str = include_str!("../../data/first_names.txt");
const LAST_NAMES: &str = include_str!("../../data/last_names.txt");
const LOCATIONS: &str = include_str!("../../data/locations.txt");
const TIME_WORDS: &str = include_str!("../../data/time_words.txt");

fn entries(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_set(text: &str) -> HashSet<String> {
    entries(text).map(|(_, l)| l.to_lowercase()).collect()
}

fn parse_ranked(text: &str) -> Result<HashMap<String, u32>> {
    let mut out = HashMap::new();
    for (line, l) in entries(text) {
        let (name, rank) = l.split_once('\t').ok_or_else(|| Error::Parse {
            line,
            message: "expected name<TAB>rank".into(),
        })?;
        let rank: u32 = rank.trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad rank `{rank}`"),
        })?;
        if rank == 0 {
            return Err(Error::Parse {
                line,
                message: "ranks start at 1".into(),
            });
        }
        let slot = out.entry(name.trim().to_lowercase()).or_insert(rank);
        *slot = (*slot).min(rank);
    }
    Ok(out)
}

impl LexiconSet {
    pub fn builtin() -> Self {
        LexiconSet {
            titles: parse_set(TITLES),
            first_names: parse_ranked(FIRST_NAMES).expect("shipped first-name list"),
            last_names: parse_ranked(LAST_NAMES).expect("shipped surname list"),
            location_words: parse_set(LOCATIONS),
            time_words: parse_set(TIME_WORDS),
        }
    }

    /// Load lexicons from `dir`; files that are absent fall back to the
    /// shipped lists.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| -> Result<Option<String>> {
            let p = dir.join(name);
            if p.is_file() {
                fs::read_to_string(&p)
                    .map(Some)
                    .map_err(|e| Error::io(p.display().to_string(), e))
            } else {
                Ok(None)
            }
        };
        let mut lex = Self::builtin();
        if let Some(t) = read("titles.txt")? {
            lex.titles = parse_set(&t);
        }
        if let Some(t) = read("first_names.txt")? {
            lex.first_names = parse_ranked(&t)?;
        }
        if let Some(t) = read("last_names.txt")? {
            lex.last_names = parse_ranked(&t)?;
        }
        if let Some(t) = read("locations.txt")? {
            lex.location_words = parse_set(&t);
        }
        if let Some(t) = read("time_words.txt")? {
            lex.time_words = parse_set(&t);
        }
        Ok(lex)
    }

    /// Semantic class of a token. Priority: title, name, location, time.
    /// A word on both name lists goes to the list where it ranks higher
    /// (smaller rank); ties go to last name.
    pub fn semantic(&self, token: &Token) -> SemanticCategory {
        let lower = token.surface.to_lowercase();
        let bare = lower.trim_end_matches('.');
        if token.kind == TokenKind::Word {
            if self.titles.contains(&lower) || self.titles.contains(bare) {
                return SemanticCategory::Title;
            }
            match (self.first_names.get(bare), self.last_names.get(bare)) {
                (Some(f), Some(l)) if f < l => return SemanticCategory::FirstName,
                (Some(_), Some(_)) | (None, Some(_)) => return SemanticCategory::LastName,
                (Some(_), None) => return SemanticCategory::FirstName,
                (None, None) => {}
            }
            if self.location_words.contains(&lower) || self.location_words.contains(bare) {
                return SemanticCategory::Location;
            }
        }
        if self.time_words.contains(&lower) || is_clock_time(&lower) {
            return SemanticCategory::Time;
        }
        SemanticCategory::None
    }
}

/// `hh`, `hh:mm`, `h.mm`, optionally followed by am/pm.
fn is_clock_time(s: &str) -> bool {
    let s = s
        .strip_suffix("a.m.")
        .or_else(|| s.strip_suffix("p.m."))
        .or_else(|| s.strip_suffix("am"))
        .or_else(|| s.strip_suffix("pm"))
        .unwrap_or(s);
    let digits = |p: &str| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit());
    let (hours, minutes) = match s.split_once([':', '.']) {
        Some((h, m)) => (h, Some(m)),
        None => (s, None),
    };
    if !digits(hours) || hours.len() > 2 || hours.parse::<u32>().map_or(true, |h| h > 24) {
        return false;
    }
    match minutes {
        None => true,
        Some(m) => digits(m) && m.len() == 2 && m.parse::<u32>().is_ok_and(|m| m < 60),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sem(lex: &LexiconSet, s: &str) -> SemanticCategory {
        lex.semantic(&Token::new(s, 0))
    }

    #[test]
    fn shipped_lists_load() {
        let lex = LexiconSet::builtin();
        assert!(lex.first_names.len() > 400);
        assert!(lex.last_names.len() > 900);
        assert!(lex.first_names.values().all(|&r| r > 0));
    }

    #[test]
    fn titles_and_locations() {
        let lex = LexiconSet::builtin();
        assert_eq!(sem(&lex, "Doctor"), SemanticCategory::Title);
        assert_eq!(sem(&lex, "Dr."), SemanticCategory::Title);
        assert_eq!(sem(&lex, "Hall"), SemanticCategory::Location);
        assert_eq!(sem(&lex, "auditorium"), SemanticCategory::Location);
        assert_eq!(sem(&lex, "presents"), SemanticCategory::None);
    }

    #[test]
    fn rank_decides_between_first_and_last_name() {
        let mut lex = LexiconSet::default();
        lex.first_names.insert("alexander".into(), 20);
        lex.last_names.insert("alexander".into(), 118);
        assert_eq!(sem(&lex, "Alexander"), SemanticCategory::FirstName);
        lex.first_names.insert("alexander".into(), 200);
        assert_eq!(sem(&lex, "Alexander"), SemanticCategory::LastName);
        lex.first_names.insert("alexander".into(), 118);
        assert_eq!(sem(&lex, "Alexander"), SemanticCategory::LastName);
    }

    #[test]
    fn title_beats_name() {
        let mut lex = LexiconSet::builtin();
        lex.last_names.insert("doctor".into(), 1);
        assert_eq!(sem(&lex, "Doctor"), SemanticCategory::Title);
    }

    #[test]
    fn clock_times() {
        let lex = LexiconSet::builtin();
        for s in ["am", "PM", "p.m.", "noon", "1", "12", "3:30", "4.15", "3:30pm", "10am"] {
            assert_eq!(sem(&lex, s), SemanticCategory::Time, "{s}");
        }
        for s in ["125", "3:3", "25", "10.5", "1993", "3:75"] {
            assert_eq!(sem(&lex, s), SemanticCategory::None, "{s}");
        }
    }

    #[test]
    fn ranked_file_errors() {
        assert!(parse_ranked("bob\n").is_err());
        assert!(parse_ranked("bob\tx\n").is_err());
        assert!(parse_ranked("bob\t0\n").is_err());
        assert_eq!(parse_ranked("Bob\t3\nbob\t2\n").unwrap()["bob"], 2);
    }
}
