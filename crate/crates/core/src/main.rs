use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use deideval::anonymize::MaskStyle;
use deideval::corpus::GeneratorOptions;
use deideval::report::{
    cmd_anonymize, cmd_evaluate, cmd_generate, cmd_report, AnonymizeMethod, ConfigOverrides, EmbeddingSource,
    EvaluationConfig, Format, KSetting,
};

#[derive(Parser)]
#[command(name = "deideval", version, about = "Evaluate clinical-text anonymization methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic annotated corpus from note templates.
    Generate {
        #[arg(long)]
        templates: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        min_entity_len: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a reference anonymizer over a corpus.
    Anonymize {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
        /// Mask style for `redact`: redacted, category or star.
        #[arg(long, default_value = "redacted")]
        mask: MaskStyle,
        /// Rule file (JSONL) for `regex`; the shipped rules otherwise.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// word2vec text file, or `toy:<dim>,<seed>`, for `kneo`.
        #[arg(long)]
        embeddings: Option<EmbeddingSource>,
    },
    /// Score an anonymized corpus against its original.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        anonymized: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: Format,
    },
    /// Render one or more JSON reports as a comparison table.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, default_value = "markdown")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Redact,
    Regex,
    Kneo,
    Identity,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML file with th_s, th_b, k, provider, workers, max_in_flight.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    th_s: Option<f64>,
    #[arg(long)]
    th_b: Option<f64>,
    #[arg(long)]
    k: Option<KSetting>,
    /// file:<orig>[,<anon>] | toy:<N>,<seed> | remote[:<url>]
    #[arg(long)]
    provider: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    max_in_flight: Option<usize>,
}

impl ConfigArgs {
    fn resolve(self) -> anyhow::Result<EvaluationConfig> {
        let mut config = match &self.config {
            Some(path) => EvaluationConfig::load(path)?,
            None => EvaluationConfig::default(),
        };
        config.apply(ConfigOverrides {
            th_s: self.th_s,
            th_b: self.th_b,
            k: self.k,
            provider: self.provider,
            workers: self.workers,
            max_in_flight: self.max_in_flight,
        })?;
        Ok(config)
    }
}

const PARTIAL_FAILURE: u8 = 1;
const USAGE_ERROR: u8 = 2;

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Generate {
            templates,
            count,
            seed,
            min_entity_len,
            out,
        } => {
            let n = cmd_generate(&templates, count, seed, &out, &GeneratorOptions { min_entity_len })?;
            log::info!("wrote {n} notes to {}", out.display());
        }
        Command::Anonymize {
            corpus,
            method,
            out,
            mask,
            rules,
            embeddings,
        } => {
            let method = match method {
                Method::Identity => AnonymizeMethod::Identity,
                Method::Redact => AnonymizeMethod::Redact(mask),
                Method::Regex => AnonymizeMethod::Regex(rules),
                Method::Kneo => match embeddings {
                    Some(source) => AnonymizeMethod::Kneo(source),
                    None => anyhow::bail!("--method kneo requires --embeddings <file|toy:<dim>,<seed>>"),
                },
            };
            let n = cmd_anonymize(&corpus, &method, &out)?;
            log::info!("wrote {n} anonymized notes to {}", out.display());
        }
        Command::Evaluate {
            corpus,
            anonymized,
            config,
            out,
            format,
        } => {
            let config = config.resolve()?;
            let report = cmd_evaluate(&corpus, &anonymized, &config, out.as_deref(), format)?;
            if report.aggregate.failed > 0 {
                eprintln!("warning: {} notes failed; see the report's errors fields", report.aggregate.failed);
                return Ok(PARTIAL_FAILURE);
            }
        }
        Command::Report { reports, format, out } => {
            cmd_report(&reports, format, out.as_deref())?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
