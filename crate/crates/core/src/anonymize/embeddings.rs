//! Word-embedding tables in the word2vec text format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::text::fold_str;

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("bad header {0:?}: expected \"<count> <dim>\"")]
    BadHeader(String),
    #[error("line {line}: expected {expected} components, found {found}")]
    DimMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: bad number {value:?}")]
    BadNumber { line: usize, value: String },
    #[error("header declares {declared} entries, found {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("zero vector for token {0:?}")]
    ZeroVector(String),
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
    #[error("table needs at least 2 entries, found {0}")]
    TooFewEntries(usize),
    #[error("dimension must be positive")]
    ZeroDimension,
}

/// Immutable token → vector map with unit-normalized copies for cosine
/// lookups.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
    units: Vec<Vec<f64>>,
    exact: HashMap<String, usize>,
    folded: HashMap<String, usize>,
    folded_tokens: Vec<String>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, entries: Vec<(String, Vec<f64>)>) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        if entries.len() < 2 {
            return Err(EmbeddingError::TooFewEntries(entries.len()));
        }
        let mut tokens = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len());
        let mut units = Vec::with_capacity(entries.len());
        let mut exact = HashMap::new();
        let mut folded = HashMap::new();
        let mut folded_tokens = Vec::with_capacity(entries.len());
        for (i, (token, v)) in entries.into_iter().enumerate() {
            if v.len() != dim {
                return Err(EmbeddingError::DimMismatch {
                    line: i + 2,
                    expected: dim,
                    found: v.len(),
                });
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(EmbeddingError::ZeroVector(token));
            }
            if exact.insert(token.clone(), i).is_some() {
                return Err(EmbeddingError::DuplicateToken(token));
            }
            let f = fold_str(&token);
            folded.entry(f.clone()).or_insert(i);
            folded_tokens.push(f);
            units.push(v.iter().map(|x| x / norm).collect());
            vectors.push(v);
            tokens.push(token);
        }
        Ok(EmbeddingTable {
            dim,
            tokens,
            vectors,
            units,
            exact,
            folded,
            folded_tokens,
        })
    }

    pub fn parse(content: &str) -> Result<Self, EmbeddingError> {
        let mut lines = content.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| EmbeddingError::BadHeader(String::new()))?;
        let mut parts = header.split_whitespace();
        let parse_usize = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
        let (Some(count), Some(dim), None) = (parse_usize(parts.next()), parse_usize(parts.next()), parts.next()) else {
            return Err(EmbeddingError::BadHeader(header.to_string()));
        };
        let mut entries = Vec::with_capacity(count);
        for (i, raw) in lines {
            let line = i + 1;
            let mut fields = raw.split_whitespace();
            let token = fields.next().unwrap_or_default().to_string();
            let values = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| EmbeddingError::BadNumber {
                        line,
                        value: f.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != dim {
                return Err(EmbeddingError::DimMismatch {
                    line,
                    expected: dim,
                    found: values.len(),
                });
            }
            entries.push((token, values));
        }
        if entries.len() != count {
            return Err(EmbeddingError::CountMismatch {
                declared: count,
                found: entries.len(),
            });
        }
        EmbeddingTable::new(dim, entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| EmbeddingError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&content)
    }

    /// word2vec text serialization.
    pub fn to_word2vec(&self) -> String {
        let mut out = format!("{} {}\n", self.tokens.len(), self.dim);
        for (token, v) in self.tokens.iter().zip(&self.vectors) {
            out.push_str(token);
            for x in v {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.exact.get(token).map(|&i| self.vectors[i].as_slice())
    }

    /// Row of `token`: exact match first, then case-insensitive.
    pub(crate) fn lookup(&self, token: &str) -> Option<usize> {
        self.exact
            .get(token)
            .or_else(|| self.folded.get(&fold_str(token)))
            .copied()
    }

    pub(crate) fn token(&self, row: usize) -> &str {
        &self.tokens[row]
    }

    pub(crate) fn folded_token(&self, row: usize) -> &str {
        &self.folded_tokens[row]
    }

    pub(crate) fn unit(&self, row: usize) -> &[f64] {
        &self.units[row]
    }
}

/// Builds a clustered toy table: every group gets a random centroid and its
/// words are scattered around it, so nearest neighbours stay within a group.
/// Words are case-folded; a word listed in several groups keeps its first.
pub fn toy_embeddings<S: AsRef<str>>(groups: &[Vec<S>], dim: usize, seed: u64) -> Result<EmbeddingTable, EmbeddingError> {
    const SPREAD: f64 = 0.35;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut entries = Vec::new();
    for group in groups {
        let centroid: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for word in group {
            let word = fold_str(word.as_ref());
            if word.is_empty() || word.chars().any(char::is_whitespace) || !seen.insert(word.clone()) {
                continue;
            }
            let v: Vec<f64> = centroid
                .iter()
                .map(|c| c + SPREAD * rng.gen_range(-1.0..1.0))
                .collect();
            entries.push((word, v));
        }
    }
    EmbeddingTable::new(dim, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "3 2\ncat 1.0 0.1\ndog 0.9 0.2\nmouse 0.1 1.0\n";

    #[test]
    fn parses_word2vec() {
        let t = EmbeddingTable::parse(SAMPLE).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.dim(), 2);
        assert_eq!(t.vector("dog").unwrap(), [0.9, 0.2]);
        let again = EmbeddingTable::parse(&t.to_word2vec()).unwrap();
        assert_eq!(again.tokens(), t.tokens());
    }

    #[test]
    fn rejects_invalid_tables() {
        assert!(matches!(EmbeddingTable::parse("x\n"), Err(EmbeddingError::BadHeader(_))));
        assert!(matches!(
            EmbeddingTable::parse("2 2\na 1 0\nb 1\n"),
            Err(EmbeddingError::DimMismatch { line: 3, .. })
        ));
        assert!(matches!(
            EmbeddingTable::parse("3 2\na 1 0\nb 0 1\n"),
            Err(EmbeddingError::CountMismatch { .. })
        ));
        assert_eq!(
            EmbeddingTable::parse("2 2\na 1 0\nb 0 0\n").unwrap_err(),
            EmbeddingError::ZeroVector("b".into())
        );
        assert!(matches!(EmbeddingTable::parse("1 2\na 1 0\n"), Err(EmbeddingError::TooFewEntries(1))));
        assert!(matches!(
            EmbeddingTable::parse("2 2\na 1 0\na 0 1\n"),
            Err(EmbeddingError::DuplicateToken(_))
        ));
        assert!(matches!(
            EmbeddingTable::parse("2 2\na 1 x\nb 0 1\n"),
            Err(EmbeddingError::BadNumber { line: 2, .. })
        ));
    }

    #[test]
    fn toy_tables_are_deterministic() {
        let groups = vec![vec!["Alpha", "beta"], vec!["gamma", "ALPHA", "delta"]];
        let a = toy_embeddings(&groups, 8, 1).unwrap();
        let b = toy_embeddings(&groups, 8, 1).unwrap();
        assert_eq!(a.tokens(), ["alpha", "beta", "gamma", "delta"]);
        assert_eq!(a.to_word2vec(), b.to_word2vec());
    }
}
