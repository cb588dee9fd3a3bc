use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use super::config::EvaluationConfig;
use super::evaluate::{evaluate_corpus, EvaluationReport};
use super::render::{render, Format};
use crate::anonymize::{
    corpus_embedding_groups, default_rules, load_rules, toy_embeddings, Anonymizer, EmbeddingTable, GoldRedactor,
    Identity, Kneo, MaskStyle, RuleSet,
};
use crate::corpus::{
    generate_synthetic_note_with, load_anonymized, load_corpus, load_templates, save_anonymized, save_corpus,
    GeneratorOptions,
};

/// Embedding table for KNEO: a word2vec file, or `toy:<dim>,<seed>` built
/// from the corpus vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingSource {
    File(PathBuf),
    Toy { dim: usize, seed: u64 },
}

impl FromStr for EmbeddingSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some(rest) = s.strip_prefix("toy:") else {
            return Ok(EmbeddingSource::File(s.into()));
        };
        let (dim, seed) = rest.split_once(',').unwrap_or((rest, "0"));
        let dim = dim
            .parse::<usize>()
            .ok()
            .filter(|d| *d > 0)
            .ok_or_else(|| format!("toy embeddings: bad dimension {dim:?}"))?;
        let seed = seed.parse().map_err(|_| format!("toy embeddings: bad seed {seed:?}"))?;
        Ok(EmbeddingSource::Toy { dim, seed })
    }
}

impl EmbeddingSource {
    pub fn load(&self, corpus: &[crate::ClinicalNote]) -> Result<EmbeddingTable> {
        Ok(match self {
            EmbeddingSource::File(path) => EmbeddingTable::load(path)?,
            EmbeddingSource::Toy { dim, seed } => toy_embeddings(&corpus_embedding_groups(corpus), *dim, *seed)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnonymizeMethod {
    Identity,
    Redact(MaskStyle),
    /// Shipped rules when no rule file is given.
    Regex(Option<PathBuf>),
    Kneo(EmbeddingSource),
}

impl AnonymizeMethod {
    fn build(&self, corpus: &[crate::ClinicalNote]) -> Result<Box<dyn Anonymizer>> {
        Ok(match self {
            AnonymizeMethod::Identity => Box::new(Identity),
            AnonymizeMethod::Redact(style) => Box::new(GoldRedactor { style: *style }),
            AnonymizeMethod::Regex(path) => {
                let rules = match path {
                    Some(p) => load_rules(p)?,
                    None => default_rules(),
                };
                Box::new(RuleSet::compile(&rules)?)
            }
            AnonymizeMethod::Kneo(source) => Box::new(Kneo::new(source.load(corpus)?)),
        })
    }
}

/// Writes `count` synthetic notes, note `i` from template `i mod T` with
/// seed `seed + i`. Returns the number of notes written.
pub fn cmd_generate(templates: &Path, count: usize, seed: u64, out: &Path, options: &GeneratorOptions) -> Result<usize> {
    let templates = load_templates(templates)?;
    if templates.is_empty() && count > 0 {
        bail!("no templates to generate from");
    }
    let notes = (0..count)
        .map(|i| generate_synthetic_note_with(&templates[i % templates.len()], seed.wrapping_add(i as u64), options))
        .collect::<Result<Vec<_>, _>>()?;
    save_corpus(out, &notes)?;
    Ok(notes.len())
}

/// Runs one anonymizer over a corpus, preserving note order.
pub fn cmd_anonymize(corpus: &Path, method: &AnonymizeMethod, out: &Path) -> Result<usize> {
    let notes = load_corpus(corpus)?;
    let anonymizer = method.build(&notes)?;
    let outputs: Vec<_> = notes.par_iter().map(|n| anonymizer.anonymize(n)).collect();
    save_anonymized(out, &outputs)?;
    Ok(outputs.len())
}

/// Evaluates one anonymized file and writes the rendered report to `out`
/// (standard output when `None`).
pub fn cmd_evaluate(
    corpus: &Path,
    anonymized: &Path,
    config: &EvaluationConfig,
    out: Option<&Path>,
    format: Format,
) -> Result<EvaluationReport> {
    config.validate()?;
    let notes = load_corpus(corpus)?;
    let outputs = load_anonymized(anonymized)?;
    let provider = config.build_provider()?;
    let report = evaluate_corpus(&notes, &outputs, config, provider.as_ref())?;
    emit(out, &render(std::slice::from_ref(&report), format))?;
    Ok(report)
}

/// Re-renders one or more JSON reports, one row per method.
pub fn cmd_report(inputs: &[PathBuf], format: Format, out: Option<&Path>) -> Result<Vec<EvaluationReport>> {
    if inputs.is_empty() {
        bail!("no report files given");
    }
    let reports = inputs
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<EvaluationReport>(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    emit(out, &render(&reports, format))?;
    Ok(reports)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
