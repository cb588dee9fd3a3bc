//! Evaluation toolkit for clinical-text anonymization.
//!
//! The crate scores any anonymization method by comparing original notes
//! (with gold sensitive-entity spans) against the method's output:
//!
//! - [`lev`]: Levenshtein-based leak metrics (ALID, LR, LRDI, LRQI) and
//!   string-matching recall.
//! - [`retention`]: clinical-information retention over classifier logits
//!   (JSC and NSDCG) plus logit providers.
//! - [`anonymize`]: reference anonymizers used as evaluation subjects.
//! - [`corpus`]: annotated corpus model, JSONL I/O and a seeded synthetic
//!   note generator.
//! - [`report`]: configuration, corpus-level evaluation, aggregation and
//!   rendering.

pub mod anonymize;
pub mod corpus;
pub mod lev;
pub mod report;
pub mod retention;
mod text;

pub use corpus::{
    AnonymizedNote, ClinicalNote, EntityAnnotation, EntityCategory, IdentifierClass, NotePair,
    NoteTemplate, Span,
};
pub use lev::{SensitivityReport, SimilarityScore};
pub use retention::{LogitProvider, LogitVector, RetentionReport};
