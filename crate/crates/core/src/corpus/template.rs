use super::{CorpusError, EntityCategory};

const OPEN: char = '⟦';
const CLOSE: char = '⟧';

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateSegment {
    Literal(String),
    Placeholder(EntityCategory),
}

/// Note body with `⟦CATEGORY⟧` placeholders, parsed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteTemplate {
    id: String,
    body: String,
    segments: Vec<TemplateSegment>,
}

impl NoteTemplate {
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Result<Self, CorpusError> {
        let id = id.into();
        let body = body.into();
        let segments = parse(&id, &body)?;
        Ok(NoteTemplate { id, body, segments })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn segments(&self) -> &[TemplateSegment] {
        &self.segments
    }

    pub fn placeholders(&self) -> impl Iterator<Item = EntityCategory> + '_ {
        self.segments.iter().filter_map(|s| match s {
            TemplateSegment::Placeholder(c) => Some(*c),
            TemplateSegment::Literal(_) => None,
        })
    }
}

fn parse(id: &str, body: &str) -> Result<Vec<TemplateSegment>, CorpusError> {
    let mut segments = Vec::new();
    let mut literal = String::new();
    let mut chars = body.chars().enumerate();
    while let Some((offset, c)) = chars.next() {
        if c != OPEN {
            literal.push(c);
            continue;
        }
        let mut name = String::new();
        let mut closed = false;
        for (_, c) in chars.by_ref() {
            if c == CLOSE {
                closed = true;
                break;
            }
            name.push(c);
        }
        if !closed {
            return Err(CorpusError::UnterminatedPlaceholder {
                id: id.to_string(),
                offset,
            });
        }
        let category: EntityCategory = name.trim().parse()?;
        if !literal.is_empty() {
            segments.push(TemplateSegment::Literal(std::mem::take(&mut literal)));
        }
        segments.push(TemplateSegment::Placeholder(category));
    }
    if !literal.is_empty() {
        segments.push(TemplateSegment::Literal(literal));
    }
    Ok(segments)
}
