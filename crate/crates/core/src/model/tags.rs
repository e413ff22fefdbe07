//! Hidden variable alphabets: Tag, LastTarget and DocumentSegment.

use std::fmt;

use crate::corpus::{FieldSet, TagSpan};

/// Position of a token within a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubTag {
    Begin,
    Inside,
    End,
    Single,
}

impl SubTag {
    pub const ALL: [SubTag; 4] = [SubTag::Begin, SubTag::Inside, SubTag::End, SubTag::Single];

    fn prefix(self) -> char {
        match self {
            SubTag::Begin => 'B',
            SubTag::Inside => 'I',
            SubTag::End => 'E',
            SubTag::Single => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TagState {
    Background,
    Field { field: usize, sub: SubTag },
}

impl TagState {
    pub fn field(self) -> Option<usize> {
        match self {
            TagState::Background => None,
            TagState::Field { field, .. } => Some(field),
        }
    }

    pub fn sub(self) -> Option<SubTag> {
        match self {
            TagState::Background => None,
            TagState::Field { sub, .. } => Some(sub),
        }
    }

    /// Dense index: background is 0, then four sub-states per field.
    pub fn index(self) -> usize {
        match self {
            TagState::Background => 0,
            TagState::Field { field, sub } => 1 + 4 * field + sub as usize,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            TagState::Background
        } else {
            TagState::Field {
                field: (i - 1) / 4,
                sub: SubTag::ALL[(i - 1) % 4],
            }
        }
    }

    /// Whether a slot may start here (first token of a document).
    pub fn can_start(self) -> bool {
        !matches!(self.sub(), Some(SubTag::Inside | SubTag::End))
    }

    /// Span well-formedness: `I(f)`/`E(f)` only after `B(f)`/`I(f)`, and
    /// `B(f)`/`I(f)` must be followed by `I(f)`/`E(f)`.
    pub fn can_follow(prev: TagState, next: TagState) -> bool {
        let open = |t: TagState| match t {
            TagState::Field { field, sub: SubTag::Begin | SubTag::Inside } => Some(field),
            _ => None,
        };
        let continues = |t: TagState| match t {
            TagState::Field { field, sub: SubTag::Inside | SubTag::End } => Some(field),
            _ => None,
        };
        match (open(prev), continues(next)) {
            (Some(f), Some(g)) => f == g,
            (Some(_), None) => false,
            (None, Some(_)) => false,
            (None, None) => true,
        }
    }

    pub fn label(self, fields: &FieldSet) -> String {
        match self {
            TagState::Background => "BG".to_string(),
            TagState::Field { field, sub } => format!("{}-{}", sub.prefix(), fields.name(field)),
        }
    }

    pub fn parse_label(label: &str, fields: &FieldSet) -> Option<Self> {
        if label == "BG" {
            return Some(TagState::Background);
        }
        let (p, name) = label.split_once('-')?;
        let sub = match p {
            "B" => SubTag::Begin,
            "I" => SubTag::Inside,
            "E" => SubTag::End,
            "S" => SubTag::Single,
            _ => return None,
        };
        Some(TagState::Field {
            field: fields.id(name)?,
            sub,
        })
    }
}

/// Size of the Tag alphabet for `fields` target fields.
pub fn tag_count(fields: usize) -> usize {
    4 * fields + 1
}

/// Field of the most recent non-background tag; `None` before any slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LastTarget(pub Option<usize>);

impl LastTarget {
    pub const NONE: LastTarget = LastTarget(None);

    pub fn index(self) -> usize {
        self.0.map_or(0, |f| f + 1)
    }

    pub fn from_index(i: usize) -> Self {
        LastTarget(i.checked_sub(1))
    }

    /// Deterministic memory update.
    pub fn update(self, tag: TagState) -> Self {
        match tag.field() {
            Some(f) => LastTarget(Some(f)),
            None => self,
        }
    }

    pub fn label(self, fields: &FieldSet) -> String {
        self.0.map_or_else(|| "none".to_string(), |f| fields.name(f).to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Header,
    Body,
}

impl Segment {
    pub const ALL: [Segment; 2] = [Segment::Header, Segment::Body];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Segment::ALL[i]
    }

    pub fn label(self) -> &'static str {
        match self {
            Segment::Header => "Header",
            Segment::Body => "Body",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Header" | "header" | "H" => Some(Segment::Header),
            "Body" | "body" | "B" => Some(Segment::Body),
            _ => None,
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Assemble a tag sequence into spans.
///
/// A new span starts at `B`/`S`, at a change of field, or after `E`/`S`.
/// Returns the spans and the number of ill-formed runs that were salvaged
/// (runs that did not start with `B`/`S` or did not end with `E`/`S`).
pub fn spans_from_tags(tags: &[TagState]) -> (Vec<TagSpan>, usize) {
    let mut spans = Vec::new();
    let mut ill_formed = 0;
    let mut open: Option<(usize, usize, bool)> = None;
    let mut close = |open: &mut Option<(usize, usize, bool)>, end: usize, closed_ok: bool, spans: &mut Vec<TagSpan>| {
        if let Some((field, start, started_ok)) = open.take() {
            if !(started_ok && closed_ok) {
                ill_formed += 1;
            }
            spans.push(TagSpan { field, start, end });
        }
    };
    for (i, &tag) in tags.iter().enumerate() {
        match tag {
            TagState::Background => close(&mut open, i.wrapping_sub(1), false, &mut spans),
            TagState::Field { field, sub } => {
                let continues = matches!(open, Some((f, _, _)) if f == field)
                    && matches!(sub, SubTag::Inside | SubTag::End);
                if !continues {
                    close(&mut open, i.wrapping_sub(1), false, &mut spans);
                    open = Some((field, i, matches!(sub, SubTag::Begin | SubTag::Single)));
                }
                if matches!(sub, SubTag::End | SubTag::Single) {
                    let ok = matches!(open, Some((_, s, _)) if (sub == SubTag::Single) == (s == i));
                    close(&mut open, i, ok, &mut spans);
                }
            }
        }
    }
    close(&mut open, tags.len().wrapping_sub(1), false, &mut spans);
    (spans, ill_formed)
}
