//! Levenshtein-based anonymization sensitivity metrics.
//!
//! For every gold entity of an original note we locate its sentence, align
//! that sentence to the most similar sentence of the anonymized note, and
//! take the best windowed Levenshtein ratio of the entity inside it (the
//! LSI). Corpus-facing metrics are derived from the list of LSIs:
//!
//! - ALID: `(1 - mean(S)) * 100`
//! - LR: percentage of entities with LSI strictly below `th_s`
//! - LRDI: 100 if every direct identifier is below `th_s`, else 0
//! - LRQI: LR restricted to quasi-identifiers
//!
//! All comparisons are case-insensitive.

mod distance;
mod sensitivity;
mod window;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distance::{distance, dp_distance, levenshtein_distance, Pattern};
pub use sensitivity::{entity_lsi, evaluate_sensitivity, EntityScore, LsiBreakdown, PreparedPair, SensitivityReport};
pub use window::{align_sentence, levenshtein_ratio, lsi, lsi_naive};

use crate::corpus::EntityAnnotation;
use crate::text::fold_str;

/// Similarity threshold used by LR, LRDI and LRQI unless configured.
pub const DEFAULT_TH_S: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevError {
    #[error("undefined ratio: both strings are empty")]
    UndefinedRatio,
    #[error("empty entity")]
    EmptyEntity,
    #[error("annotation [{start}, {end}) outside note of length {len}")]
    AnnotationOutOfBounds { start: usize, end: usize, len: usize },
    #[error("similarity threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(String),
}

/// A similarity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ZERO: SimilarityScore = SimilarityScore(0.0);
    pub const ONE: SimilarityScore = SimilarityScore(1.0);

    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(SimilarityScore(value))
    }

    pub(crate) fn clamped(value: f64) -> Self {
        SimilarityScore(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub(crate) fn check_th_s(th_s: f64) -> Result<(), LevError> {
    if th_s > 0.0 && th_s <= 1.0 {
        Ok(())
    } else {
        Err(LevError::InvalidThreshold(th_s.to_string()))
    }
}

/// Average Levenshtein Index of Dissimilarity, in percent. `None` when
/// there are no scores.
pub fn alid(scores: &[SimilarityScore]) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    let mean = scores.iter().map(|s| s.0).sum::<f64>() / scores.len() as f64;
    Some((1.0 - mean) * 100.0)
}

/// Levenshtein recall at `th_s`: percentage of scores strictly below the
/// threshold. `None` when there are no scores.
pub fn levenshtein_recall(scores: &[SimilarityScore], th_s: f64) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    let hidden = scores.iter().filter(|s| s.0 < th_s).count();
    Some(hidden as f64 / scores.len() as f64 * 100.0)
}

/// All-or-nothing recall over direct identifiers: 100 when every score is
/// below `th_s`, otherwise 0. `None` when the note has no direct identifier.
pub fn lrdi(direct: &[SimilarityScore], th_s: f64) -> Option<f64> {
    if direct.is_empty() {
        return None;
    }
    Some(if direct.iter().all(|s| s.0 < th_s) { 100.0 } else { 0.0 })
}

/// Levenshtein recall over quasi-identifier scores only.
pub fn lrqi(quasi: &[SimilarityScore], th_s: f64) -> Option<f64> {
    levenshtein_recall(quasi, th_s)
}

/// String-matching recall: percentage of entities whose text does not
/// occur (case-folded) anywhere in the anonymized text. Each annotation
/// counts separately. `None` for an empty entity list.
pub fn string_matching_recall(entities: &[EntityAnnotation], anonymized_text: &str) -> Option<f64> {
    if entities.is_empty() {
        return None;
    }
    let haystack = fold_str(anonymized_text);
    let hidden = entities
        .iter()
        .filter(|e| !haystack.contains(&fold_str(&e.entity_text)))
        .count();
    Some(hidden as f64 / entities.len() as f64 * 100.0)
}
