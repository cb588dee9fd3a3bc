//! Annotated clinical-note corpora.
//!
//! Offsets everywhere in this module count Unicode scalar values, not bytes.

mod fake;
mod io;
pub(crate) mod sentences;
mod template;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::char_slice;

pub use fake::{generate_synthetic_note, generate_synthetic_note_with, FakeValues, GeneratorOptions};
pub use io::{
    load_anonymized, load_corpus, load_templates, parse_anonymized, parse_corpus, parse_templates,
    save_anonymized, save_corpus, write_anonymized, write_corpus, EntityRecord, NoteRecord,
};
pub use sentences::{split_sentences, ABBREVIATIONS};
pub use template::{NoteTemplate, TemplateSegment};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("note {id}: empty span [{start}, {end})")]
    EmptySpan { id: String, start: usize, end: usize },
    #[error("note {id}: span [{start}, {end}) out of bounds (text length {len})")]
    SpanOutOfBounds {
        id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("note {id}: span [{start}, {end}) text {found:?} does not match declared {declared:?}")]
    SpanTextMismatch {
        id: String,
        start: usize,
        end: usize,
        found: String,
        declared: String,
    },
    #[error("note {id}: overlapping spans [{a_start}, {a_end}) and [{b_start}, {b_end})")]
    OverlappingSpans {
        id: String,
        a_start: usize,
        a_end: usize,
        b_start: usize,
        b_end: usize,
    },
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("unknown category {0}")]
    UnknownCategory(String),
    #[error("template {id}: unterminated placeholder at offset {offset}")]
    UnterminatedPlaceholder { id: String, offset: usize },
    #[error("pair id mismatch: original {original}, anonymized {anonymized}")]
    PairIdMismatch { original: String, anonymized: String },
    #[error("could not draw a {category} value of at least {min_len} characters")]
    EntityTooShort { category: EntityCategory, min_len: usize },
}

impl CorpusError {
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            e @ (CorpusError::Malformed { .. } | CorpusError::AtLine { .. }) => e,
            e => CorpusError::AtLine {
                line,
                source: Box::new(e),
            },
        }
    }
}

/// Sensitive-entity category, following the MIMIC III anonymization tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityCategory {
    #[serde(rename = "NAME")]
    Name,
    #[serde(rename = "CONTACT_NUMBER")]
    ContactNumber,
    #[serde(rename = "ID")]
    Id,
    #[serde(rename = "EMAIL")]
    Email,
    #[serde(rename = "LOCATION")]
    Location,
    #[serde(rename = "DATE")]
    Date,
    #[serde(rename = "URL")]
    Url,
    #[serde(rename = "AGE_ABOVE_89")]
    AgeAbove89,
    #[serde(rename = "INSTITUTION")]
    Institution,
    #[serde(rename = "HOLIDAY")]
    Holiday,
}

impl EntityCategory {
    pub const ALL: [EntityCategory; 10] = [
        EntityCategory::Name,
        EntityCategory::ContactNumber,
        EntityCategory::Id,
        EntityCategory::Email,
        EntityCategory::Location,
        EntityCategory::Date,
        EntityCategory::Url,
        EntityCategory::AgeAbove89,
        EntityCategory::Institution,
        EntityCategory::Holiday,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityCategory::Name => "NAME",
            EntityCategory::ContactNumber => "CONTACT_NUMBER",
            EntityCategory::Id => "ID",
            EntityCategory::Email => "EMAIL",
            EntityCategory::Location => "LOCATION",
            EntityCategory::Date => "DATE",
            EntityCategory::Url => "URL",
            EntityCategory::AgeAbove89 => "AGE_ABOVE_89",
            EntityCategory::Institution => "INSTITUTION",
            EntityCategory::Holiday => "HOLIDAY",
        }
    }

    pub fn identifier_class(self) -> IdentifierClass {
        match self {
            EntityCategory::Name
            | EntityCategory::ContactNumber
            | EntityCategory::Id
            | EntityCategory::Email => IdentifierClass::Direct,
            EntityCategory::Location
            | EntityCategory::Date
            | EntityCategory::Url
            | EntityCategory::AgeAbove89
            | EntityCategory::Institution
            | EntityCategory::Holiday => IdentifierClass::Quasi,
        }
    }

    pub(crate) fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap_or(0)
    }
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityCategory {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownCategory(s.to_string()))
    }
}

/// Whether an entity identifies a person on its own or only in combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentifierClass {
    Direct,
    Quasi,
}

/// Half-open range of scalar-value offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const EMPTY: Span = Span { start: 0, end: 0 };

    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, offset: usize) -> bool {
        self.start <= offset && offset < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityAnnotation {
    pub entity_text: String,
    pub category: EntityCategory,
    pub char_start: usize,
    pub char_end: usize,
}

impl EntityAnnotation {
    pub fn span(&self) -> Span {
        Span::new(self.char_start, self.char_end)
    }

    /// Length in scalar values.
    pub fn len(&self) -> usize {
        self.char_end - self.char_start
    }

    pub fn is_empty(&self) -> bool {
        self.char_end <= self.char_start
    }

    pub fn identifier_class(&self) -> IdentifierClass {
        self.category.identifier_class()
    }
}

/// An original note with gold sensitive-entity annotations.
///
/// Construction validates every annotation against the text; notes are
/// immutable afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClinicalNote {
    id: String,
    text: String,
    char_len: usize,
    annotations: Vec<EntityAnnotation>,
}

impl ClinicalNote {
    /// Builds a note from raw `(start, end, category)` spans, deriving each
    /// entity text. Spans are sorted by start; empty, out-of-bounds and
    /// overlapping spans are rejected.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        spans: impl IntoIterator<Item = (usize, usize, EntityCategory)>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let text = text.into();
        let char_len = text.chars().count();
        let mut spans: Vec<_> = spans.into_iter().collect();
        spans.sort_by_key(|&(start, end, _)| (start, end));

        let mut annotations = Vec::with_capacity(spans.len());
        for (start, end, category) in spans {
            if end > char_len || start > char_len {
                return Err(CorpusError::SpanOutOfBounds {
                    id,
                    start,
                    end,
                    len: char_len,
                });
            }
            if start >= end {
                return Err(CorpusError::EmptySpan { id, start, end });
            }
            if let Some(prev) = annotations.last() {
                let prev: &EntityAnnotation = prev;
                if start < prev.char_end {
                    return Err(CorpusError::OverlappingSpans {
                        id,
                        a_start: prev.char_start,
                        a_end: prev.char_end,
                        b_start: start,
                        b_end: end,
                    });
                }
            }
            annotations.push(EntityAnnotation {
                entity_text: char_slice(&text, start, end).to_string(),
                category,
                char_start: start,
                char_end: end,
            });
        }

        Ok(ClinicalNote {
            id,
            text,
            char_len,
            annotations,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Text length in scalar values.
    pub fn char_len(&self) -> usize {
        self.char_len
    }

    pub fn annotations(&self) -> &[EntityAnnotation] {
        &self.annotations
    }

    /// Annotations of one identifier class, in text order.
    pub fn annotations_of(&self, class: IdentifierClass) -> impl Iterator<Item = &EntityAnnotation> {
        self.annotations
            .iter()
            .filter(move |a| a.identifier_class() == class)
    }
}

/// Output of an anonymization method for one original note.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymizedNote {
    pub id: String,
    pub text: String,
    #[serde(rename = "method")]
    pub method_tag: String,
}

impl AnonymizedNote {
    pub fn new(id: impl Into<String>, text: impl Into<String>, method_tag: impl Into<String>) -> Self {
        AnonymizedNote {
            id: id.into(),
            text: text.into(),
            method_tag: method_tag.into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NotePair<'a> {
    pub original: &'a ClinicalNote,
    pub anonymized: &'a AnonymizedNote,
}

impl<'a> NotePair<'a> {
    pub fn new(original: &'a ClinicalNote, anonymized: &'a AnonymizedNote) -> Result<Self, CorpusError> {
        if original.id != anonymized.id {
            return Err(CorpusError::PairIdMismatch {
                original: original.id.clone(),
                anonymized: anonymized.id.clone(),
            });
        }
        Ok(NotePair {
            original,
            anonymized,
        })
    }
}

/// Rejects duplicate note ids.
pub(crate) fn check_unique_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<(), CorpusError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CorpusError::DuplicateId(id.to_string()));
        }
    }
    Ok(())
}
