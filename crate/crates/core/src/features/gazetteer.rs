//! Lemma lookup and the compressed lemma vocabulary.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::corpus::{Document, Token};
use crate::error::{Error, Result};

const LEMMAS: &str = include_str!("../../data/lemmas.txt");

/// Surface form to lemma, keyed case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct LemmaTable {
    map: HashMap<String, String>,
}

impl LemmaTable {
    pub fn builtin() -> Self {
        Self::parse(LEMMAS).expect("shipped lemma table")
    }

    /// `surface<TAB>lemma` per line; `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, lemma) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: n + 1,
                message: "expected surface<TAB>lemma".into(),
            })?;
            map.insert(surface.to_lowercase(), lemma.to_lowercase());
        }
        Ok(LemmaTable { map })
    }

    /// Table lookup, falling back to the lowercased surface.
    pub fn lemma(&self, surface: &str) -> String {
        let lower = surface.to_lowercase();
        match self.map.get(&lower) {
            Some(l) => l.clone(),
            None => lower,
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GazetteerParams {
    /// Token radius around gold spans.
    pub window: usize,
    /// Minimum corpus frequency.
    pub min_freq: usize,
    /// Vocabulary cap.
    pub max_size: usize,
}

impl Default for GazetteerParams {
    fn default() -> Self {
        GazetteerParams {
            window: 3,
            min_freq: 3,
            max_size: 1200,
        }
    }
}

/// Lemma vocabulary with ids `1..=V`, followed by the reserved
/// out-of-vocabulary id `V+1` and not-a-word id `V+2`.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: BTreeMap<String, u32>,
    pub params: GazetteerParams,
    /// Distinct word lemmas seen while building.
    pub listem_count: usize,
    lemmas: LemmaTable,
}

impl Gazetteer {
    pub fn build(docs: &[&Document], lemmas: LemmaTable, params: GazetteerParams) -> Result<Self> {
        let mut freq: HashMap<String, usize> = HashMap::new();
        let mut near: HashMap<String, ()> = HashMap::new();
        for doc in docs {
            let n = doc.tokens.len();
            let mut in_window = vec![false; n];
            for span in &doc.gold_spans {
                let lo = span.start.saturating_sub(params.window);
                let hi = (span.end + params.window).min(n.saturating_sub(1));
                for flag in &mut in_window[lo..=hi] {
                    *flag = true;
                }
            }
            for (tok, &w) in doc.tokens.iter().zip(&in_window) {
                if !tok.is_word() {
                    continue;
                }
                let lemma = lemmas.lemma(&tok.surface);
                if w {
                    near.insert(lemma.clone(), ());
                }
                *freq.entry(lemma).or_default() += 1;
            }
        }
        let mut vocab: Vec<(&String, usize)> = freq
            .iter()
            .filter(|(l, &f)| f >= params.min_freq && near.contains_key(*l))
            .map(|(l, &f)| (l, f))
            .collect();
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary {
                window: params.window,
                min_freq: params.min_freq,
            });
        }
        vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        vocab.truncate(params.max_size);
        let entries = vocab
            .into_iter()
            .enumerate()
            .map(|(i, (l, _))| (l.clone(), i as u32 + 1))
            .collect();
        Ok(Gazetteer {
            entries,
            params,
            listem_count: freq.len(),
            lemmas,
        })
    }

    pub fn vocabulary_size(&self) -> usize {
        self.entries.len()
    }

    pub fn oov(&self) -> u32 {
        self.entries.len() as u32 + 1
    }

    pub fn naw(&self) -> u32 {
        self.entries.len() as u32 + 2
    }

    /// Number of distinct ids (vocabulary plus the two reserved values).
    pub fn cardinality(&self) -> usize {
        self.entries.len() + 2
    }

    pub fn id(&self, lemma: &str) -> Option<u32> {
        self.entries.get(lemma).copied()
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.entries.contains_key(lemma)
    }

    pub fn lemma_table(&self) -> &LemmaTable {
        &self.lemmas
    }

    /// Lemma form of `id`, if it is a vocabulary id.
    pub fn lemma_of(&self, id: u32) -> Option<&str> {
        self.entries.iter().find(|(_, &v)| v == id).map(|(k, _)| k.as_str())
    }

    /// Gazetteer id of a token: `NaW` for non-words, the lemma's id when in
    /// the vocabulary, `OoV` otherwise.
    pub fn lemmatise(&self, token: &Token) -> u32 {
        if !token.is_word() {
            return self.naw();
        }
        self.id(&self.lemmas.lemma(&token.surface)).unwrap_or_else(|| self.oov())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("# bien-gazetteer v1\n");
        let p = self.params;
        let _ = writeln!(
            out,
            "# params window={} min_freq={} max_size={} listems={}",
            p.window, p.min_freq, p.max_size, self.listem_count
        );
        let _ = writeln!(out, "# oov={} naw={}", self.oov(), self.naw());
        let mut by_id: Vec<(&String, &u32)> = self.entries.iter().collect();
        by_id.sort_by_key(|(_, &id)| id);
        for (lemma, id) in by_id {
            let _ = writeln!(out, "{lemma}\t{id}");
        }
        out
    }

    pub fn parse(text: &str, lemmas: LemmaTable) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "# bien-gazetteer v1")) => {}
            Some((_, other)) => {
                return Err(Error::VersionMismatch {
                    expected: "# bien-gazetteer v1".into(),
                    found: other.to_string(),
                })
            }
            None => return Err(Error::ChecksumMismatch),
        }
        let mut params = GazetteerParams::default();
        let mut listem_count = 0;
        let mut reserved: (Option<usize>, Option<usize>) = (None, None);
        let mut entries = BTreeMap::new();
        for (n, line) in lines {
            let bad = |message: String| Error::Parse { line: n + 1, message };
            if let Some(rest) = line.strip_prefix("# ") {
                for kv in rest.split_whitespace() {
                    let Some((k, v)) = kv.split_once('=') else {
                        continue;
                    };
                    let v: usize = v.parse().map_err(|_| bad(format!("bad number in `{kv}`")))?;
                    match k {
                        "window" => params.window = v,
                        "min_freq" => params.min_freq = v,
                        "max_size" => params.max_size = v,
                        "listems" => listem_count = v,
                        "oov" => reserved.0 = Some(v),
                        "naw" => reserved.1 = Some(v),
                        _ => return Err(bad(format!("unknown header key `{k}`"))),
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (lemma, id) = line.split_once('\t').ok_or_else(|| bad("expected lemma<TAB>id".into()))?;
            let id: u32 = id.parse().map_err(|_| bad(format!("bad id `{id}`")))?;
            if id as usize != entries.len() + 1 {
                return Err(bad(format!("ids must be dense and ascending, got {id}")));
            }
            entries.insert(lemma.to_string(), id);
        }
        let g = Gazetteer {
            entries,
            params,
            listem_count,
            lemmas,
        };
        if let (Some(oov), Some(naw)) = reserved {
            if oov != g.oov() as usize || naw != g.naw() as usize {
                return Err(Error::Validation(format!(
                    "reserved ids oov={oov} naw={naw} do not follow a vocabulary of {}",
                    g.vocabulary_size()
                )));
            }
        } else {
            return Err(Error::ChecksumMismatch);
        }
        Ok(g)
    }
}
