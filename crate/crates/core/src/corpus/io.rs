//! JSONL readers and writers for corpora, anonymized outputs and templates.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_unique_ids, AnonymizedNote, ClinicalNote, CorpusError, EntityCategory, NoteTemplate};

/// On-disk form of a note. Entity texts are derived from the spans and
/// only checked if a record carries one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoteRecord {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub entities: Vec<EntityRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntityRecord {
    pub start: usize,
    pub end: usize,
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl NoteRecord {
    pub fn into_note(self) -> Result<ClinicalNote, CorpusError> {
        let NoteRecord { id, text, entities } = self;
        let mut spans = Vec::with_capacity(entities.len());
        let mut declared = Vec::new();
        for e in &entities {
            let category: EntityCategory = e.category.parse()?;
            spans.push((e.start, e.end, category));
            if let Some(t) = &e.text {
                declared.push((e.start, e.end, t.clone()));
            }
        }
        let note = ClinicalNote::new(id, text, spans)?;
        for (start, end, declared) in declared {
            let found = note
                .annotations()
                .iter()
                .find(|a| a.char_start == start && a.char_end == end)
                .map(|a| a.entity_text.clone())
                .unwrap_or_default();
            if found != declared {
                return Err(CorpusError::SpanTextMismatch {
                    id: note.id().to_string(),
                    start,
                    end,
                    found,
                    declared,
                });
            }
        }
        Ok(note)
    }
}

impl From<&ClinicalNote> for NoteRecord {
    fn from(note: &ClinicalNote) -> Self {
        NoteRecord {
            id: note.id().to_string(),
            text: note.text().to_string(),
            entities: note
                .annotations()
                .iter()
                .map(|a| EntityRecord {
                    start: a.char_start,
                    end: a.char_end,
                    category: a.category.as_str().to_string(),
                    text: None,
                })
                .collect(),
        }
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Non-blank lines with their 1-based line numbers.
fn lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: usize, raw: &str) -> Result<T, CorpusError> {
    serde_json::from_str(raw).map_err(|source| CorpusError::Malformed { line, source })
}

pub fn parse_corpus(content: &str) -> Result<Vec<ClinicalNote>, CorpusError> {
    let mut notes = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, raw) in lines(content) {
        let record: NoteRecord = parse_line(line, raw)?;
        let note = record.into_note().map_err(|e| e.at_line(line))?;
        if !seen.insert(note.id().to_string()) {
            return Err(CorpusError::DuplicateId(note.id().to_string()).at_line(line));
        }
        notes.push(note);
    }
    Ok(notes)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<ClinicalNote>, CorpusError> {
    parse_corpus(&read(path.as_ref())?)
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(&item).expect("record serialization is infallible");
        out.write_all(line.as_bytes()).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Serializes a corpus as JSONL text.
pub fn write_corpus(notes: &[ClinicalNote]) -> String {
    let mut out = String::new();
    for note in notes {
        out.push_str(&serde_json::to_string(&NoteRecord::from(note)).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn save_corpus(path: impl AsRef<Path>, notes: &[ClinicalNote]) -> Result<(), CorpusError> {
    write_jsonl(path.as_ref(), notes.iter().map(NoteRecord::from))
}

pub fn parse_anonymized(content: &str) -> Result<Vec<AnonymizedNote>, CorpusError> {
    let notes = lines(content)
        .map(|(line, raw)| parse_line::<AnonymizedNote>(line, raw))
        .collect::<Result<Vec<_>, _>>()?;
    check_unique_ids(notes.iter().map(|n| n.id.as_str()))?;
    Ok(notes)
}

pub fn load_anonymized(path: impl AsRef<Path>) -> Result<Vec<AnonymizedNote>, CorpusError> {
    parse_anonymized(&read(path.as_ref())?)
}

pub fn write_anonymized(notes: &[AnonymizedNote]) -> String {
    let mut out = String::new();
    for note in notes {
        out.push_str(&serde_json::to_string(note).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn save_anonymized(path: impl AsRef<Path>, notes: &[AnonymizedNote]) -> Result<(), CorpusError> {
    write_jsonl(path.as_ref(), notes)
}

#[derive(Deserialize)]
struct TemplateRecord {
    id: String,
    body: String,
}

pub fn parse_templates(content: &str) -> Result<Vec<NoteTemplate>, CorpusError> {
    let mut templates = Vec::new();
    for (line, raw) in lines(content) {
        let record: TemplateRecord = parse_line(line, raw)?;
        templates.push(NoteTemplate::new(record.id, record.body).map_err(|e| e.at_line(line))?);
    }
    check_unique_ids(templates.iter().map(|t| t.id()))?;
    Ok(templates)
}

pub fn load_templates(path: impl AsRef<Path>) -> Result<Vec<NoteTemplate>, CorpusError> {
    parse_templates(&read(path.as_ref())?)
}
