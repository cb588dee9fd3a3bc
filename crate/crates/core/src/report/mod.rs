//! Configuration, corpus-level evaluation, aggregation, rendering and the
//! command implementations behind the CLI.

mod aggregate;
mod commands;
mod config;
mod evaluate;
mod render;

pub use aggregate::{aggregate, mean_applicable, AggregateReport, MicroAverages, NotApplicable};
pub use commands::{cmd_anonymize, cmd_evaluate, cmd_generate, cmd_report, AnonymizeMethod, EmbeddingSource};
pub use config::{ConfigError, ConfigOverrides, EvaluationConfig, KSetting, ProviderSpec, REMOTE_URL_ENV};
pub use evaluate::{evaluate_corpus, evaluate_note, EvaluateError, EvaluationReport, NoteReport};
pub use render::{render, render_csv, render_json, render_markdown, Format, CSV_HEADER};
