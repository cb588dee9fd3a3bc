//! Reference anonymization methods used as evaluation subjects.

mod embeddings;
mod kneo;
mod redact;
mod regex_ner;

use crate::corpus::{AnonymizedNote, ClinicalNote};

pub use embeddings::{toy_embeddings, EmbeddingError, EmbeddingTable};
pub use kneo::{corpus_embedding_groups, kneo_anonymize, nearest_neighbor, Kneo, NUM_TOKEN, UNK_TOKEN};
pub use redact::{redact_gold, MaskStyle};
pub use regex_ner::{
    default_rules, load_rules, parse_rules, regex_ner_anonymize, Matcher, PatternRule, RuleError, RuleSet,
};

/// A method that turns an original note into an anonymized one.
pub trait Anonymizer: Send + Sync {
    /// Label recorded as the output's `method`.
    fn tag(&self) -> &str;

    fn anonymize_text(&self, note: &ClinicalNote) -> String;

    fn anonymize(&self, note: &ClinicalNote) -> AnonymizedNote {
        AnonymizedNote::new(note.id(), self.anonymize_text(note), self.tag())
    }
}

/// Passthrough control subject: leaks everything, retains everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

pub fn identity_anonymize(text: &str) -> String {
    text.to_string()
}

impl Anonymizer for Identity {
    fn tag(&self) -> &str {
        "identity"
    }

    fn anonymize_text(&self, note: &ClinicalNote) -> String {
        identity_anonymize(note.text())
    }
}

/// Gold-span redaction as an [`Anonymizer`].
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldRedactor {
    pub style: MaskStyle,
}

impl Anonymizer for GoldRedactor {
    fn tag(&self) -> &str {
        "redact"
    }

    fn anonymize_text(&self, note: &ClinicalNote) -> String {
        redact_gold(note, self.style)
    }
}

impl Anonymizer for RuleSet {
    fn tag(&self) -> &str {
        "regex"
    }

    fn anonymize_text(&self, note: &ClinicalNote) -> String {
        regex_ner_anonymize(note.text(), self)
    }
}

impl Anonymizer for Kneo {
    fn tag(&self) -> &str {
        "kneo"
    }

    fn anonymize_text(&self, note: &ClinicalNote) -> String {
        self.apply(note.text())
    }
}
