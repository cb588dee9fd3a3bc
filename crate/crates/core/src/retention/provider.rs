//! Sources of classifier logits.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Condvar, Mutex, OnceLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LogitVector, RetentionError};
use crate::text::fold_char;

/// Default cap on concurrent requests to the inference service.
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("no {side} logits for note {id}")]
    MissingId { id: String, side: &'static str },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: malformed logits record: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate logits id {0}")]
    DuplicateId(String),
    #[error("logit length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("classifier needs at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("inference service returned HTTP {0}")]
    Status(u16),
    #[error("inference service request failed: {0}")]
    Wire(String),
    #[error("malformed inference response: {0}")]
    BadResponse(String),
}

/// Which side of a note pair logits are requested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Original,
    Anonymized,
}

impl Side {
    fn as_str(self) -> &'static str {
        match self {
            Side::Original => "original",
            Side::Anonymized => "anonymized",
        }
    }
}

/// Anything that can produce a fixed-length logit vector for a note.
///
/// Implementations must return the same vector for the same input within
/// a run, or report `is_deterministic() == false`.
pub trait LogitProvider: Send + Sync {
    fn logits(&self, side: Side, note_id: &str, text: &str) -> Result<Vec<f64>, ProviderError>;

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Fetches and validates one logit vector.
pub fn get_logits(
    provider: &dyn LogitProvider,
    side: Side,
    note_id: &str,
    text: &str,
) -> Result<LogitVector, RetentionError> {
    let values = provider.logits(side, note_id, text)?;
    LogitVector::new(note_id, values)
}

#[derive(Deserialize)]
struct LogitsRecord {
    id: String,
    logits: Vec<f64>,
}

/// Parses a logits JSONL file. The vector length is fixed by the first
/// record.
pub fn parse_logits_file(content: &str) -> Result<HashMap<String, Vec<f64>>, ProviderError> {
    let mut out = HashMap::new();
    let mut n = None;
    for (i, raw) in content.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = i + 1;
        let record: LogitsRecord = serde_json::from_str(raw).map_err(|e| ProviderError::Malformed {
            line,
            message: e.to_string(),
        })?;
        let expected = *n.get_or_insert(record.logits.len());
        if record.logits.len() != expected {
            return Err(ProviderError::LengthMismatch {
                expected,
                found: record.logits.len(),
            });
        }
        if out.insert(record.id.clone(), record.logits).is_some() {
            return Err(ProviderError::DuplicateId(record.id));
        }
    }
    Ok(out)
}

pub fn load_logits_file(path: impl AsRef<Path>) -> Result<HashMap<String, Vec<f64>>, ProviderError> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| ProviderError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_logits_file(&content)
}

/// Precomputed logits keyed by note id. With a single table both sides
/// read from it; otherwise original and anonymized logits come from
/// separate files.
#[derive(Debug, Clone)]
pub struct FileProvider {
    original: HashMap<String, Vec<f64>>,
    anonymized: Option<HashMap<String, Vec<f64>>>,
}

impl FileProvider {
    pub fn new(original: HashMap<String, Vec<f64>>, anonymized: Option<HashMap<String, Vec<f64>>>) -> Result<Self, ProviderError> {
        if let Some(anon) = &anonymized {
            let n_orig = original.values().next().map(Vec::len);
            let n_anon = anon.values().next().map(Vec::len);
            if let (Some(expected), Some(found)) = (n_orig, n_anon) {
                if expected != found {
                    return Err(ProviderError::LengthMismatch { expected, found });
                }
            }
        }
        Ok(FileProvider { original, anonymized })
    }

    pub fn single(table: HashMap<String, Vec<f64>>) -> Self {
        FileProvider {
            original: table,
            anonymized: None,
        }
    }

    pub fn from_paths(original: impl AsRef<Path>, anonymized: Option<&Path>) -> Result<Self, ProviderError> {
        let original = load_logits_file(original)?;
        let anonymized = anonymized.map(load_logits_file).transpose()?;
        FileProvider::new(original, anonymized)
    }
}

impl LogitProvider for FileProvider {
    fn logits(&self, side: Side, note_id: &str, _text: &str) -> Result<Vec<f64>, ProviderError> {
        let table = match (side, &self.anonymized) {
            (Side::Anonymized, Some(anon)) => anon,
            _ => &self.original,
        };
        table.get(note_id).cloned().ok_or_else(|| ProviderError::MissingId {
            id: note_id.to_string(),
            side: side.as_str(),
        })
    }
}

/// Deterministic bag-of-words stand-in classifier.
///
/// Each (token, class) pair gets a pseudo-random weight in `[-1, 1]` from a
/// seeded 64-bit hash; a class logit is the sum of its token weights.
/// Weights are summed in fixed point so the result does not depend on token
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyClassifier {
    n_classes: usize,
    seed: u64,
}

const FIXED_ONE: f64 = (1u64 << 31) as f64;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

impl ToyClassifier {
    pub fn new(n_classes: usize, seed: u64) -> Result<Self, ProviderError> {
        if n_classes < 2 {
            return Err(ProviderError::TooFewClasses(n_classes));
        }
        Ok(ToyClassifier { n_classes, seed })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Case-folded, punctuation-stripped whitespace tokens.
    pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
        text.split_whitespace()
            .map(|t| t.chars().filter(|c| c.is_alphanumeric()).map(fold_char).collect::<String>())
            .filter(|t| !t.is_empty())
    }

    /// Weight of a token for `class` in fixed point: 32 uniform hash bits
    /// mapped onto `[-2^31, 2^31)`, i.e. `[-1, 1)` after scaling.
    fn weight(&self, token_hash: u64, class: usize) -> i64 {
        let h = splitmix64(token_hash ^ splitmix64(self.seed) ^ splitmix64(class as u64 + 1));
        (h >> 32) as i64 - (1i64 << 31)
    }

    pub fn classify(&self, text: &str) -> Vec<f64> {
        let mut sums = vec![0i64; self.n_classes];
        for token in Self::tokens(text) {
            let th = fnv1a(token.as_bytes());
            for (class, sum) in sums.iter_mut().enumerate() {
                *sum += self.weight(th, class);
            }
        }
        sums.into_iter().map(|s| s as f64 / FIXED_ONE).collect()
    }
}

/// Logits of the toy classifier for `text`.
pub fn toy_classifier_logits(text: &str, n_classes: usize, seed: u64) -> Result<Vec<f64>, ProviderError> {
    Ok(ToyClassifier::new(n_classes, seed)?.classify(text))
}

impl LogitProvider for ToyClassifier {
    fn logits(&self, _side: Side, _note_id: &str, text: &str) -> Result<Vec<f64>, ProviderError> {
        Ok(self.classify(text))
    }
}

/// Request body of `POST /v1/logits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitsRequest {
    pub texts: Vec<String>,
}

/// Response body of `POST /v1/logits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitsResponse {
    pub model_id: String,
    pub n_classes: usize,
    pub logits: Vec<Vec<f64>>,
}

/// Response body of `GET /v1/health`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model_id: String,
    pub n_classes: usize,
}

struct InFlight {
    active: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *active >= self.limit {
            active = self.freed.wait(active).unwrap_or_else(|e| e.into_inner());
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut active = self.0.active.lock().unwrap_or_else(|e| e.into_inner());
        *active -= 1;
        self.0.freed.notify_one();
    }
}

/// Blocking client for the logits inference service.
///
/// The class count is pinned by the first response (or up front with
/// [`RemoteClassifier::with_classes`]) and enforced on every later one.
pub struct RemoteClassifier {
    base_url: String,
    agent: ureq::Agent,
    in_flight: InFlight,
    n_classes: OnceLock<usize>,
}

impl RemoteClassifier {
    pub fn new(base_url: impl Into<String>, max_in_flight: usize) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        RemoteClassifier {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            agent,
            in_flight: InFlight {
                active: Mutex::new(0),
                freed: Condvar::new(),
                limit: max_in_flight.max(1),
            },
            n_classes: OnceLock::new(),
        }
    }

    pub fn with_classes(self, n_classes: usize) -> Self {
        let _ = self.n_classes.set(n_classes);
        self
    }

    pub fn health(&self) -> Result<HealthResponse, ProviderError> {
        let _permit = self.in_flight.acquire();
        let mut resp = self
            .agent
            .get(format!("{}/v1/health", self.base_url))
            .call()
            .map_err(wire_error)?;
        resp.body_mut()
            .read_json()
            .map_err(|e| ProviderError::BadResponse(e.to_string()))
    }

    /// Logits for a batch of texts, one vector per text.
    pub fn logits_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let request = LogitsRequest {
            texts: texts.to_vec(),
        };
        let response: LogitsResponse = {
            let _permit = self.in_flight.acquire();
            let mut resp = self
                .agent
                .post(format!("{}/v1/logits", self.base_url))
                .send_json(&request)
                .map_err(wire_error)?;
            resp.body_mut()
                .read_json()
                .map_err(|e| ProviderError::BadResponse(e.to_string()))?
        };
        if response.logits.len() != texts.len() {
            return Err(ProviderError::BadResponse(format!(
                "{} vectors for {} texts",
                response.logits.len(),
                texts.len()
            )));
        }
        let expected = *self.n_classes.get_or_init(|| response.n_classes);
        for v in &response.logits {
            if v.len() != expected || response.n_classes != expected {
                return Err(ProviderError::LengthMismatch {
                    expected,
                    found: if v.len() != expected { v.len() } else { response.n_classes },
                });
            }
        }
        Ok(response.logits)
    }
}

fn wire_error(e: ureq::Error) -> ProviderError {
    match e {
        ureq::Error::StatusCode(code) => ProviderError::Status(code),
        other => ProviderError::Wire(other.to_string()),
    }
}

impl LogitProvider for RemoteClassifier {
    fn logits(&self, _side: Side, _note_id: &str, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut batch = self.logits_batch(&[text.to_string()])?;
        Ok(batch.pop().unwrap_or_default())
    }
}
