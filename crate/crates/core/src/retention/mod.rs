//! Clinical-information retention metrics over classifier logits.
//!
//! Both metrics compare a classifier's logits on the original note with its
//! logits on the anonymized note:
//!
//! - JSC: Jaccard coefficient of the classes whose softmax probability
//!   exceeds `th_b`.
//! - NSDCG: an NDCG variant whose discount for rank `i` is the softmax of
//!   the original logits sorted descending, and whose gain is `e^z`, with
//!   `z` the original logits reordered by the anonymized ranking.

mod provider;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::NotePair;

pub use provider::{
    get_logits, load_logits_file, parse_logits_file, FileProvider, LogitsRequest, LogitsResponse,
    toy_classifier_logits, HealthResponse, ProviderError, RemoteClassifier, Side, ToyClassifier,
    DEFAULT_MAX_IN_FLIGHT,
};
pub use provider::LogitProvider;

/// Binarization threshold used by JSC unless configured.
pub const DEFAULT_TH_B: f64 = 0.05;

/// Logits beyond this magnitude are clamped before exponentiation.
pub const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetentionError {
    #[error("logit length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("K = {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("binarization threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("non-finite logit at index {index} for note {note_id}")]
    NonFinite { note_id: String, index: usize },
    #[error("empty logit vector for note {0}")]
    Empty(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Raw classifier outputs for one note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitVector {
    pub note_id: String,
    values: Vec<f64>,
}

impl LogitVector {
    pub fn new(note_id: impl Into<String>, values: Vec<f64>) -> Result<Self, RetentionError> {
        let note_id = note_id.into();
        if values.is_empty() {
            return Err(RetentionError::Empty(note_id));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(RetentionError::NonFinite { note_id, index });
        }
        Ok(LogitVector { note_id, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionReport {
    pub note_id: String,
    pub th_b: f64,
    pub k: usize,
    pub jsc: f64,
    pub nsdcg: f64,
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Indices whose probability is strictly greater than `th_b`.
pub fn binarize(probabilities: &[f64], th_b: f64) -> BTreeSet<usize> {
    probabilities
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > th_b)
        .map(|(i, _)| i)
        .collect()
}

fn check_lengths(a: &LogitVector, b: &LogitVector) -> Result<usize, RetentionError> {
    if a.len() != b.len() {
        return Err(RetentionError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.len())
}

pub(crate) fn check_th_b(th_b: f64) -> Result<(), RetentionError> {
    if th_b > 0.0 && th_b < 1.0 {
        Ok(())
    } else {
        Err(RetentionError::InvalidThreshold(th_b))
    }
}

/// Jaccard similarity (percent) between the thresholded softmax outputs of
/// two logit vectors. Two empty sets count as full agreement.
pub fn jsc(original: &LogitVector, anonymized: &LogitVector, th_b: f64) -> Result<f64, RetentionError> {
    check_lengths(original, anonymized)?;
    check_th_b(th_b)?;
    let a = binarize(&softmax(original.values()), th_b);
    let b = binarize(&softmax(anonymized.values()), th_b);
    let both = a.intersection(&b).count();
    let either = a.union(&b).count();
    if either == 0 {
        return Ok(100.0);
    }
    Ok(both as f64 / either as f64 * 100.0)
}

/// Class indices sorted by descending logit; equal logits keep ascending
/// index order.
fn descending_ranking(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order
}

fn clamped_exp(v: f64, clamped: &mut bool) -> f64 {
    if v.abs() > EXP_CLAMP {
        *clamped = true;
    }
    v.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
}

/// Normalized softmax discounted cumulative gain at `k`, in percent.
///
/// Only the ranking induced by `anonymized` enters the result.
pub fn nsdcg(original: &LogitVector, anonymized: &LogitVector, k: usize) -> Result<f64, RetentionError> {
    let n = check_lengths(original, anonymized)?;
    if k == 0 || k > n {
        return Err(RetentionError::KOutOfRange { k, n });
    }
    let orig = original.values();
    let sorted: Vec<f64> = descending_ranking(orig).into_iter().map(|i| orig[i]).collect();
    let discount = softmax(&sorted);
    let reordered: Vec<f64> = descending_ranking(anonymized.values())
        .into_iter()
        .map(|i| orig[i])
        .collect();

    let mut clamped = false;
    let mut sdcg = 0.0;
    let mut ideal = 0.0;
    for i in 0..k {
        sdcg += discount[i] * clamped_exp(reordered[i], &mut clamped);
        ideal += discount[i] * clamped_exp(sorted[i], &mut clamped);
    }
    if clamped {
        log::warn!(
            "note {}: logits clamped to ±{EXP_CLAMP} before exponentiation",
            original.note_id
        );
    }
    Ok(sdcg / ideal * 100.0)
}

/// Fetches logits for both sides of a pair and computes JSC and NSDCG.
/// `k = None` uses every class.
pub fn evaluate_retention(
    pair: NotePair<'_>,
    provider: &dyn LogitProvider,
    th_b: f64,
    k: Option<usize>,
) -> Result<RetentionReport, RetentionError> {
    check_th_b(th_b)?;
    let id = pair.original.id();
    let original = get_logits(provider, Side::Original, id, pair.original.text())?;
    let anonymized = get_logits(provider, Side::Anonymized, id, &pair.anonymized.text)?;
    let k = k.unwrap_or(original.len());
    Ok(RetentionReport {
        note_id: id.to_string(),
        th_b,
        k,
        jsc: jsc(&original, &anonymized, th_b)?,
        nsdcg: nsdcg(&original, &anonymized, k)?,
    })
}
