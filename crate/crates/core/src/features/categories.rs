//! Small discrete feature alphabets and the token-level functions that map
//! onto them.

use crate::corpus::{Token, TokenKind};
use crate::error::{Error, Result};

macro_rules! category {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const CARDINALITY: usize = $name::ALL.len();

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(i: usize) -> Option<Self> {
                Self::ALL.get(i).copied()
            }

            pub fn label(self) -> &'static str {
                match self { $($name::$variant => $label),+ }
            }
        }
    };
}

category!(
    /// Penn TreeBank tags clustered into seven classes.
    PosCluster {
        Cd => "CD",
        Nn => "NN",
        Nnp => "NNP",
        Vb => "VB",
        Punct => "PUNCT",
        In => "IN",
        Sym => "SYM",
    }
);

category!(
    /// Flattened syntactic chunk.
    ChunkCategory {
        Np => "NP",
        Vp => "VP",
        Pp => "PP",
        Na => "NA",
    }
);

category!(
    SemanticCategory {
        Title => "Title",
        FirstName => "FirstName",
        LastName => "LastName",
        Location => "Location",
        Time => "Time",
        None => "None",
    }
);

category!(
    CaseCategory {
        UpperInitial => "Upper",
        Lower => "lower",
        AllCaps => "ALLCAPS",
        Mixed => "Mixed",
        Na => "NA",
    }
);

category!(
    /// Surface length in characters.
    LengthBucket {
        One => "1",
        Two => "2",
        Three => "3",
        FourToFive => "4-5",
        SixToEight => "6-8",
        NinePlus => "9+",
    }
);

/// The 47 Penn TreeBank tags (36 word-level tags plus punctuation/symbol tags).
pub const PENN_TAGS: [&str; 47] = [
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP", "NNPS", "PDT",
    "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP",
    "VBZ", "WDT", "WP", "WP$", "WRB", "#", "$", ".", ",", ":", "(", ")", "``", "''", "-LRB-", "-RRB-",
];

/// Map a Penn tag (or `NA`) to its cluster. Unknown tags are an error in
/// strict mode and `SYM` otherwise.
pub fn pos_cluster(tag: &str, strict: bool) -> Result<PosCluster> {
    let cluster = match tag {
        "CD" => PosCluster::Cd,
        "NN" | "NNS" => PosCluster::Nn,
        "NNP" | "NNPS" => PosCluster::Nnp,
        "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ" => PosCluster::Vb,
        "." | "," | ":" | "(" | ")" | "``" | "''" | "-LRB-" | "-RRB-" => PosCluster::Punct,
        "IN" | "CC" | "TO" => PosCluster::In,
        "NA" => PosCluster::Sym,
        t if PENN_TAGS.contains(&t) => PosCluster::Sym,
        t if strict => return Err(Error::UnknownTag(t.to_string())),
        _ => PosCluster::Sym,
    };
    Ok(cluster)
}

pub fn chunk_flatten(raw: &str) -> ChunkCategory {
    let label = raw
        .strip_prefix("B-")
        .or_else(|| raw.strip_prefix("I-"))
        .unwrap_or(raw)
        .to_ascii_uppercase();
    if label.starts_with("NP") {
        ChunkCategory::Np
    } else if label.starts_with("VP") {
        ChunkCategory::Vp
    } else if label.starts_with("PP") {
        ChunkCategory::Pp
    } else {
        ChunkCategory::Na
    }
}

pub fn case_feature(token: &Token) -> CaseCategory {
    if token.kind != TokenKind::Word {
        return CaseCategory::Na;
    }
    let letters: Vec<char> = token.surface.chars().filter(|c| c.is_alphabetic()).collect();
    let Some((&first, rest)) = letters.split_first() else {
        return CaseCategory::Na;
    };
    if letters.iter().all(|c| c.is_lowercase()) {
        CaseCategory::Lower
    } else if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        CaseCategory::AllCaps
    } else if first.is_uppercase() && rest.iter().all(|c| c.is_lowercase()) {
        CaseCategory::UpperInitial
    } else {
        CaseCategory::Mixed
    }
}

pub fn length_feature(token: &Token) -> LengthBucket {
    match token.surface.chars().count() {
        0 | 1 => LengthBucket::One,
        2 => LengthBucket::Two,
        3 => LengthBucket::Three,
        4 | 5 => LengthBucket::FourToFive,
        6..=8 => LengthBucket::SixToEight,
        _ => LengthBucket::NinePlus,
    }
}
