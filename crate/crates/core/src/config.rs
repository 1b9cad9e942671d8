//! Pipeline configuration: one TOML or JSON file, command-line overrides
//! applied on top, and a hash identifying the resolved settings.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::DEFAULT_SPAM_THRESHOLD;
use crate::error::{Error, Result};
use crate::learner::{RelevanceConfig, TrainingFile};
use crate::matchfilter::KeywordMatch;
use crate::regions::DisasterType;
use crate::sentiment::{Granularity, SentimentConfig};

pub const CONFIG_ENV: &str = "TRIAGE_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub geometry: Option<PathBuf>,
    /// Hashtag review ledger; defaults to `<out_dir>/hashtag_ledger.csv`.
    pub ledger: Option<PathBuf>,
    pub emoji_map: Option<PathBuf>,
    pub training: Vec<TrainingFile>,
    pub sentiment_train: Option<PathBuf>,
    pub sentiment_test: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingSettings {
    pub keyword_match: KeywordMatch,
    /// Extra keywords per type, added to the built-in lists.
    pub extra_keywords: BTreeMap<DisasterType, Vec<String>>,
}

impl Default for MatchingSettings {
    fn default() -> Self {
        MatchingSettings { keyword_match: KeywordMatch::Substring, extra_keywords: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentSettings {
    #[serde(flatten)]
    pub model: SentimentConfig,
    pub granularity: Granularity,
    /// Share of the labeled sentiment data used for training when no
    /// separate test file is given.
    pub split_ratio: f64,
}

impl Default for SentimentSettings {
    fn default() -> Self {
        SentimentSettings { model: SentimentConfig::default(), granularity: Granularity::Hour, split_ratio: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub spam_threshold: usize,
    pub paths: Paths,
    pub matching: MatchingSettings,
    pub relevance: RelevanceConfig,
    pub sentiment: SentimentSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 1,
            spam_threshold: DEFAULT_SPAM_THRESHOLD,
            paths: Paths::default(),
            matching: MatchingSettings::default(),
            relevance: RelevanceConfig::default(),
            sentiment: SentimentSettings::default(),
        }
    }
}

impl PipelineConfig {
    /// Parses TOML, or JSON when the file ends in `.json`. Relative paths
    /// are resolved against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths.rebase(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// `explicit`, else `$TRIAGE_CONFIG`, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::from_file(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
                _ => Ok(PipelineConfig::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.spam_threshold == 0 {
            return Err(Error::Config("spam_threshold must be >= 1".into()));
        }
        let t = self.relevance.threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("relevance.threshold {t} outside [0, 1]")));
        }
        let r = self.sentiment.split_ratio;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Config(format!("sentiment.split_ratio {r} outside (0, 1)")));
        }
        if self.relevance.min_count == 0 {
            return Err(Error::Config("relevance.min_count must be >= 1".into()));
        }
        if self.relevance.lsi_k == Some(0) {
            return Err(Error::Config("relevance.lsi_k must be >= 1".into()));
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn ledger_path(&self) -> PathBuf {
        self.paths.ledger.clone().unwrap_or_else(|| self.out_dir().join("hashtag_ledger.csv"))
    }

    /// Hex SHA-256 of the canonical JSON form of the resolved settings.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.as_os_str() == "." {
                    *path = base.to_path_buf();
                } else if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.manifest);
        fix(&mut self.geometry);
        fix(&mut self.ledger);
        fix(&mut self.emoji_map);
        fix(&mut self.sentiment_train);
        fix(&mut self.sentiment_test);
        fix(&mut self.out_dir);
        for t in &mut self.training {
            if t.path.is_relative() {
                t.path = base.join(&t.path);
            }
        }
    }

    /// Inverse of rebasing: paths under `base` become relative to it, so a
    /// config written into `base` can be loaded from anywhere.
    pub fn relative_to(&self, base: &Path) -> Paths {
        let strip = |p: &Option<PathBuf>| {
            p.as_ref().map(|path| match path.strip_prefix(base) {
                Ok(rel) if rel.as_os_str().is_empty() => PathBuf::from("."),
                Ok(rel) => rel.to_path_buf(),
                Err(_) => path.clone(),
            })
        };
        Paths {
            corpus: strip(&self.corpus),
            manifest: strip(&self.manifest),
            geometry: strip(&self.geometry),
            ledger: strip(&self.ledger),
            emoji_map: strip(&self.emoji_map),
            training: self
                .training
                .iter()
                .map(|t| TrainingFile { path: strip(&Some(t.path.clone())).unwrap(), disaster_type: t.disaster_type })
                .collect(),
            sentiment_train: strip(&self.sentiment_train),
            sentiment_test: strip(&self.sentiment_test),
            out_dir: strip(&self.out_dir),
        }
    }
}
