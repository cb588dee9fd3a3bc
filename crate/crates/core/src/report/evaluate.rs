use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::aggregate::{aggregate, AggregateReport};
use super::config::EvaluationConfig;
use crate::corpus::{AnonymizedNote, ClinicalNote, NotePair};
use crate::lev::{PreparedPair, SensitivityReport};
use crate::retention::{evaluate_retention, LogitProvider, RetentionReport};

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("anonymized ids not found in the corpus: {}", .0.join(", "))]
    UnmatchedIds(Vec<String>),
    #[error("duplicate anonymized id {0}")]
    DuplicateId(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteReport {
    pub id: String,
    pub sensitivity: Option<SensitivityReport>,
    pub retention: Option<RetentionReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub aggregate: AggregateReport,
    pub notes: Vec<NoteReport>,
}

/// Method label for a set of outputs; several distinct tags are joined.
fn method_tag(anonymized: &[AnonymizedNote]) -> String {
    let tags: BTreeSet<&str> = anonymized.iter().map(|a| a.method_tag.as_str()).collect();
    if tags.is_empty() {
        "unknown".to_string()
    } else {
        tags.into_iter().collect::<Vec<_>>().join("+")
    }
}

pub fn evaluate_note(pair: NotePair<'_>, config: &EvaluationConfig, provider: &dyn LogitProvider) -> NoteReport {
    let mut errors = Vec::new();
    let sensitivity = PreparedPair::new(pair)
        .evaluate(config.th_s)
        .map_err(|e| errors.push(format!("sensitivity: {e}")))
        .ok();
    let retention = evaluate_retention(pair, provider, config.th_b, config.k.resolve())
        .map_err(|e| errors.push(format!("retention: {e}")))
        .ok();
    NoteReport {
        id: pair.original.id().to_string(),
        sensitivity,
        retention,
        errors,
    }
}

/// Scores every anonymized note against its original. Notes are fanned out
/// over `config.workers` threads; the report is ordered by note id.
pub fn evaluate_corpus(
    corpus: &[ClinicalNote],
    anonymized: &[AnonymizedNote],
    config: &EvaluationConfig,
    provider: &dyn LogitProvider,
) -> Result<EvaluationReport, EvaluateError> {
    let by_id: HashMap<&str, &ClinicalNote> = corpus.iter().map(|n| (n.id(), n)).collect();
    let mut seen = std::collections::HashSet::new();
    let mut unmatched = Vec::new();
    let mut pairs = Vec::with_capacity(anonymized.len());
    for a in anonymized {
        if !seen.insert(a.id.as_str()) {
            return Err(EvaluateError::DuplicateId(a.id.clone()));
        }
        match by_id.get(a.id.as_str()) {
            Some(original) => pairs.push(NotePair {
                original,
                anonymized: a,
            }),
            None => unmatched.push(a.id.clone()),
        }
    }
    if !unmatched.is_empty() {
        return Err(EvaluateError::UnmatchedIds(unmatched));
    }
    let skipped = corpus.len() - pairs.len();
    if skipped > 0 {
        log::warn!("{skipped} original notes have no anonymized counterpart and were skipped");
    }
    pairs.sort_by(|a, b| a.original.id().cmp(b.original.id()));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| EvaluateError::Pool(e.to_string()))?;
    let notes: Vec<NoteReport> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&pair| evaluate_note(pair, config, provider))
            .collect()
    });
    for n in notes.iter().filter(|n| !n.errors.is_empty()) {
        log::warn!("note {}: {}", n.id, n.errors.join("; "));
    }

    let mut aggregate = aggregate(&method_tag(anonymized), &notes, config.th_s);
    aggregate.skipped = skipped;
    Ok(EvaluationReport { aggregate, notes })
}
