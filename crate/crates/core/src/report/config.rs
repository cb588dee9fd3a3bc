use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lev::DEFAULT_TH_S;
use crate::retention::{
    FileProvider, LogitProvider, ProviderError, RemoteClassifier, ToyClassifier, DEFAULT_MAX_IN_FLIGHT,
    DEFAULT_TH_B,
};

/// Environment variable naming the inference service used by `remote`.
pub const REMOTE_URL_ENV: &str = "DEIDEVAL_REMOTE_URL";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{key}: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: String, source: toml::de::Error },
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

/// Rank cutoff for NSDCG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KSetting {
    #[default]
    All,
    Top(usize),
}

impl KSetting {
    pub fn resolve(self) -> Option<usize> {
        match self {
            KSetting::All => None,
            KSetting::Top(k) => Some(k),
        }
    }
}

impl FromStr for KSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(KSetting::All);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer or \"all\", got {s:?}")),
            Ok(k) => Ok(KSetting::Top(k)),
        }
    }
}

impl fmt::Display for KSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSetting::All => f.write_str("all"),
            KSetting::Top(k) => write!(f, "{k}"),
        }
    }
}

impl Serialize for KSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            KSetting::All => s.serialize_str("all"),
            KSetting::Top(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for KSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(k) if k > 0 => Ok(KSetting::Top(k as usize)),
            Raw::Int(k) => Err(serde::de::Error::custom(format!("k must be positive, got {k}"))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Where logits come from: `file:<orig>[,<anon>]`, `toy:<N>,<seed>` or
/// `remote[:<url>]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    File { original: PathBuf, anonymized: Option<PathBuf> },
    Toy { n_classes: usize, seed: u64 },
    Remote { url: Option<String> },
}

impl Default for ProviderSpec {
    fn default() -> Self {
        ProviderSpec::Toy { n_classes: 30, seed: 0 }
    }
}

impl FromStr for ProviderSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "file" => {
                let mut parts = rest.splitn(2, ',');
                let original = parts.next().filter(|p| !p.is_empty()).ok_or("file: needs a path")?;
                Ok(ProviderSpec::File {
                    original: original.into(),
                    anonymized: parts.next().filter(|p| !p.is_empty()).map(PathBuf::from),
                })
            }
            "toy" => {
                let (n, seed) = rest.split_once(',').unwrap_or((rest, "0"));
                let n_classes = n
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| format!("toy: bad class count {n:?}"))?;
                let seed = seed.trim().parse::<u64>().map_err(|_| format!("toy: bad seed {seed:?}"))?;
                Ok(ProviderSpec::Toy { n_classes, seed })
            }
            "remote" => Ok(ProviderSpec::Remote {
                url: Some(rest).filter(|r| !r.is_empty()).map(str::to_string),
            }),
            other => Err(format!("unknown provider {other:?} (expected file, toy or remote)")),
        }
    }
}

impl fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProviderSpec::File { original, anonymized: None } => write!(f, "file:{}", original.display()),
            ProviderSpec::File {
                original,
                anonymized: Some(a),
            } => write!(f, "file:{},{}", original.display(), a.display()),
            ProviderSpec::Toy { n_classes, seed } => write!(f, "toy:{n_classes},{seed}"),
            ProviderSpec::Remote { url: None } => f.write_str("remote"),
            ProviderSpec::Remote { url: Some(u) } => write!(f, "remote:{u}"),
        }
    }
}

impl ProviderSpec {
    pub fn build(&self, max_in_flight: usize) -> Result<Box<dyn LogitProvider>, ConfigError> {
        Ok(match self {
            ProviderSpec::File { original, anonymized } => {
                Box::new(FileProvider::from_paths(original, anonymized.as_deref())?)
            }
            ProviderSpec::Toy { n_classes, seed } => Box::new(ToyClassifier::new(*n_classes, *seed)?),
            ProviderSpec::Remote { url } => {
                let url = match url {
                    Some(u) => u.clone(),
                    None => std::env::var(REMOTE_URL_ENV)
                        .map_err(|_| invalid("provider", format!("remote needs a URL or {REMOTE_URL_ENV}")))?,
                };
                Box::new(RemoteClassifier::new(url, max_in_flight))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    pub th_s: f64,
    pub th_b: f64,
    pub k: KSetting,
    pub provider: ProviderSpec,
    pub workers: usize,
    pub max_in_flight: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            th_s: DEFAULT_TH_S,
            th_b: DEFAULT_TH_B,
            k: KSetting::All,
            provider: ProviderSpec::default(),
            workers: 1,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }
}

/// Every key optional; what is present overrides the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub th_s: Option<f64>,
    pub th_b: Option<f64>,
    pub k: Option<KSetting>,
    pub provider: Option<String>,
    pub workers: Option<usize>,
    pub max_in_flight: Option<usize>,
}

impl EvaluationConfig {
    pub fn from_toml_str(content: &str) -> Result<Self, ConfigError> {
        Self::parse_toml(content, "<config>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_toml(&content, &path.display().to_string())
    }

    fn parse_toml(content: &str, origin: &str) -> Result<Self, ConfigError> {
        let overrides: ConfigOverrides = toml::from_str(content).map_err(|source| ConfigError::Toml {
            path: origin.to_string(),
            source,
        })?;
        let mut config = EvaluationConfig::default();
        config.apply(overrides)?;
        Ok(config)
    }

    /// Applies overrides, then validates the result.
    pub fn apply(&mut self, o: ConfigOverrides) -> Result<(), ConfigError> {
        if let Some(v) = o.th_s {
            self.th_s = v;
        }
        if let Some(v) = o.th_b {
            self.th_b = v;
        }
        if let Some(v) = o.k {
            self.k = v;
        }
        if let Some(p) = o.provider {
            self.provider = p.parse().map_err(|e: String| invalid("provider", e))?;
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = o.max_in_flight {
            self.max_in_flight = v;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.th_s > 0.0 && self.th_s <= 1.0) {
            return Err(invalid("th_s", format!("must be in (0, 1], got {}", self.th_s)));
        }
        if !(self.th_b > 0.0 && self.th_b < 1.0) {
            return Err(invalid("th_b", format!("must be in (0, 1), got {}", self.th_b)));
        }
        if self.workers == 0 {
            return Err(invalid("workers", "must be positive"));
        }
        if self.max_in_flight == 0 {
            return Err(invalid("max_in_flight", "must be positive"));
        }
        if let ProviderSpec::Toy { n_classes, .. } = self.provider {
            if n_classes < 2 {
                return Err(invalid("provider", "toy classifier needs at least 2 classes"));
            }
        }
        Ok(())
    }

    pub fn build_provider(&self) -> Result<Box<dyn LogitProvider>, ConfigError> {
        self.provider.build(self.max_in_flight)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = EvaluationConfig::default();
        assert_eq!((c.th_s, c.th_b, c.k), (0.85, 0.05, KSetting::All));
        assert_eq!(c.provider, ProviderSpec::Toy { n_classes: 30, seed: 0 });
        c.validate().unwrap();
    }

    #[test]
    fn provider_specs() {
        assert_eq!(
            "file:a.jsonl".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::File {
                original: "a.jsonl".into(),
                anonymized: None
            }
        );
        assert_eq!(
            "file:a.jsonl,b.jsonl".parse::<ProviderSpec>().unwrap().to_string(),
            "file:a.jsonl,b.jsonl"
        );
        assert_eq!(
            "toy:12,7".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::Toy { n_classes: 12, seed: 7 }
        );
        assert_eq!(
            "remote:http://127.0.0.1:8741".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::Remote {
                url: Some("http://127.0.0.1:8741".into())
            }
        );
        assert_eq!("remote".parse::<ProviderSpec>().unwrap(), ProviderSpec::Remote { url: None });
        assert!("bert:x".parse::<ProviderSpec>().is_err());
        assert!("toy:x".parse::<ProviderSpec>().is_err());
    }

    #[test]
    fn k_setting() {
        assert_eq!("all".parse::<KSetting>().unwrap(), KSetting::All);
        assert_eq!("5".parse::<KSetting>().unwrap(), KSetting::Top(5));
        assert!("0".parse::<KSetting>().is_err());
    }

    #[test]
    fn toml_overrides() {
        let c = EvaluationConfig::from_toml_str("th_s = 0.9\nk = 5\nprovider = \"toy:10,3\"\nworkers = 2\n").unwrap();
        assert_eq!(c.th_s, 0.9);
        assert_eq!(c.k, KSetting::Top(5));
        assert_eq!(c.provider, ProviderSpec::Toy { n_classes: 10, seed: 3 });
        assert_eq!(c.workers, 2);
        let c = EvaluationConfig::from_toml_str("k = \"all\"").unwrap();
        assert_eq!(c.k, KSetting::All);
        assert!(EvaluationConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn rejects_bad_thresholds() {
        let mut c = EvaluationConfig::default();
        assert!(c
            .apply(ConfigOverrides {
                th_s: Some(0.0),
                ..Default::default()
            })
            .is_err());
        let mut c = EvaluationConfig::default();
        assert!(c
            .apply(ConfigOverrides {
                th_b: Some(1.0),
                ..Default::default()
            })
            .is_err());
        let mut c = EvaluationConfig::default();
        assert!(c
            .apply(ConfigOverrides {
                workers: Some(0),
                ..Default::default()
            })
            .is_err());
    }
}
