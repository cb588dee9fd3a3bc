//! Rule-based entity redaction: regular expressions plus word lists.
//!
//! A lightweight stand-in for NER-driven redaction tools; it is only as good
//! as its rules.

use std::path::{Path, PathBuf};

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::corpus::{EntityCategory, FakeValues};

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed rule: {message}")]
    Malformed { line: usize, message: String },
    #[error("rule for {category}: {source}")]
    BadRegex {
        category: EntityCategory,
        #[source]
        source: regex::Error,
    },
    #[error("rule for {0}: empty dictionary")]
    EmptyDictionary(EntityCategory),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Matcher {
    Regex(String),
    Dict(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRule {
    pub category: EntityCategory,
    pub matcher: Matcher,
}

impl PatternRule {
    pub fn regex(category: EntityCategory, source: impl Into<String>) -> Self {
        PatternRule {
            category,
            matcher: Matcher::Regex(source.into()),
        }
    }

    pub fn dict<S: AsRef<str>>(category: EntityCategory, words: impl IntoIterator<Item = S>) -> Self {
        PatternRule {
            category,
            matcher: Matcher::Dict(words.into_iter().map(|w| w.as_ref().to_string()).collect()),
        }
    }

    fn compile(&self) -> Result<Regex, RuleError> {
        let source = match &self.matcher {
            Matcher::Regex(src) => src.clone(),
            Matcher::Dict(words) => {
                let mut words: Vec<&str> = words.iter().map(|w| w.trim()).filter(|w| !w.is_empty()).collect();
                if words.is_empty() {
                    return Err(RuleError::EmptyDictionary(self.category));
                }
                // longest alternatives first so the alternation prefers them
                words.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
                words.dedup();
                let alts: Vec<String> = words.into_iter().map(regex::escape).collect();
                format!(r"(?i)\b(?:{})\b", alts.join("|"))
            }
        };
        Regex::new(&source).map_err(|source| RuleError::BadRegex {
            category: self.category,
            source,
        })
    }
}

/// Compiled, ordered rules. Earlier rules win ties.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<(EntityCategory, Regex)>,
    masks: Regex,
}

impl RuleSet {
    pub fn compile(rules: &[PatternRule]) -> Result<Self, RuleError> {
        let compiled = rules
            .iter()
            .map(|r| Ok((r.category, r.compile()?)))
            .collect::<Result<Vec<_>, RuleError>>()?;
        Ok(RuleSet {
            rules: compiled,
            masks: Regex::new(r"\[[A-Z][A-Z0-9_]*\]").expect("valid mask pattern"),
        })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Non-overlapping matches as `(byte_start, byte_end, category)`,
    /// chosen leftmost-longest with rule order breaking ties. Anything
    /// touching an existing bracketed mask is ignored.
    pub fn find(&self, text: &str) -> Vec<(usize, usize, EntityCategory)> {
        let masks: Vec<(usize, usize)> = self.masks.find_iter(text).map(|m| (m.start(), m.end())).collect();
        let overlaps_mask = |s: usize, e: usize| masks.iter().any(|&(ms, me)| s < me && ms < e);

        let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
        for (rule, (_, re)) in self.rules.iter().enumerate() {
            for m in re.find_iter(text) {
                if m.start() < m.end() && !overlaps_mask(m.start(), m.end()) {
                    candidates.push((m.start(), m.end(), rule));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));

        let mut chosen = Vec::new();
        let mut cursor = 0;
        for (start, end, rule) in candidates {
            if start >= cursor {
                chosen.push((start, end, self.rules[rule].0));
                cursor = end;
            }
        }
        chosen
    }
}

/// Replaces every rule match with `[CATEGORY]`.
pub fn regex_ner_anonymize(text: &str, rules: &RuleSet) -> String {
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (start, end, category) in rules.find(text) {
        out.push_str(&text[cursor..start]);
        out.push('[');
        out.push_str(category.as_str());
        out.push(']');
        cursor = end;
    }
    out.push_str(&text[cursor..]);
    out
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RuleValue {
    One(String),
    Many(Vec<String>),
}

#[derive(Deserialize)]
struct RuleRecord {
    category: String,
    kind: String,
    value: RuleValue,
}

/// Parses a rule JSONL file. A `dict` rule whose value is a string names a
/// word-list file (one entry per line) relative to `base_dir`.
pub fn parse_rules(content: &str, base_dir: &Path) -> Result<Vec<PatternRule>, RuleError> {
    let mut rules = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = i + 1;
        let malformed = |message: String| RuleError::Malformed { line, message };
        let record: RuleRecord = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
        let category: EntityCategory = record.category.parse().map_err(|e: crate::corpus::CorpusError| malformed(e.to_string()))?;
        let matcher = match (record.kind.as_str(), record.value) {
            ("regex", RuleValue::One(src)) => Matcher::Regex(src),
            ("dict", RuleValue::Many(words)) => Matcher::Dict(words),
            ("dict", RuleValue::One(list)) => {
                let path: PathBuf = base_dir.join(list);
                let content = std::fs::read_to_string(&path).map_err(|source| RuleError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                Matcher::Dict(content.lines().map(str::to_string).collect())
            }
            ("regex", RuleValue::Many(_)) => return Err(malformed("regex rule needs a single pattern".into())),
            (kind, _) => return Err(malformed(format!("unknown rule kind {kind:?}"))),
        };
        let rule = PatternRule { category, matcher };
        rule.compile().map_err(|e| malformed(e.to_string()))?;
        rules.push(rule);
    }
    Ok(rules)
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<Vec<PatternRule>, RuleError> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|source| RuleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_rules(&content, path.parent().unwrap_or(Path::new(".")))
}

/// The shipped rule set: patterns for emails, URLs, phone numbers, record
/// ids, dates and ages, then dictionaries drawn from the synthetic
/// generator's word lists.
pub fn default_rules() -> Vec<PatternRule> {
    use EntityCategory::*;
    let months = FakeValues::MONTHS.join("|");
    let full_name = format!(
        r"\b(?:{}) (?:{})\b",
        FakeValues::FIRST_NAMES.join("|"),
        FakeValues::LAST_NAMES.join("|")
    );
    let names = FakeValues::FIRST_NAMES.iter().chain(FakeValues::LAST_NAMES);
    vec![
        PatternRule::regex(Email, r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}"),
        PatternRule::regex(Url, r"https?://[^\s]*[^\s.,;:!?)]"),
        PatternRule::regex(
            ContactNumber,
            r"\(\d{3}\) \d{3}-\d{4}|\+\d{1,3} \d{3} \d{3} \d{3}|\b\d{3}-\d{3}-\d{4}\b|\b\d{3}-\d{4}\b",
        ),
        PatternRule::regex(Id, r"\bMRN-\d{5,}\b|\bPT\d{6,}\b|\b\d{3}-\d{2}-\d{4}\b"),
        PatternRule::regex(
            Date,
            format!(r"\b\d{{4}}-\d{{2}}-\d{{2}}\b|\b\d{{1,2}}/\d{{1,2}}/\d{{4}}\b|\b(?:{months}) \d{{1,2}}, \d{{4}}\b"),
        ),
        PatternRule::regex(AgeAbove89, r"\b(?:9\d|1[0-4]\d)-year-old\b"),
        PatternRule::dict(Institution, FakeValues::INSTITUTIONS),
        PatternRule::dict(Holiday, FakeValues::HOLIDAYS),
        PatternRule::dict(Location, FakeValues::CITIES),
        PatternRule::regex(Name, full_name),
        PatternRule::dict(Name, names),
    ]
}
