use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::regions::Region;
use crate::sentiment::Granularity;

/// File names under the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn create(&self) -> Result<()> {
        for dir in [
            self.root.clone(),
            self.root.join("regions"),
            self.root.join("hashtags"),
            self.root.join("match"),
            self.root.join("learning"),
            self.models(),
            self.sentiment_dir(),
            self.results_dir(),
        ] {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        Ok(())
    }

    pub fn run_log(&self) -> PathBuf {
        self.root.join("run_log.jsonl")
    }

    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus.jsonl")
    }

    pub fn ingest_errors(&self) -> PathBuf {
        self.root.join("ingest_errors.csv")
    }

    pub fn despammed(&self) -> PathBuf {
        self.root.join("despammed.jsonl")
    }

    pub fn spam_stats(&self) -> PathBuf {
        self.root.join("spam_stats.json")
    }

    pub fn spam_users(&self) -> PathBuf {
        self.root.join("spam_users.txt")
    }

    pub fn region(&self, region: Region) -> PathBuf {
        self.root.join("regions").join(format!("{region}.jsonl"))
    }

    pub fn hashtag_dict(&self) -> PathBuf {
        self.root.join("hashtags").join("dict.csv")
    }

    pub fn matching_ids(&self, region: Region) -> PathBuf {
        self.root.join("match").join(format!("{region}.txt"))
    }

    pub fn conventional_ids(&self, region: Region) -> PathBuf {
        self.root.join("match").join(format!("conventional_{region}.txt"))
    }

    pub fn improvement(&self) -> PathBuf {
        self.root.join("match").join("improvement.csv")
    }

    pub fn learning_ids(&self, region: Region) -> PathBuf {
        self.root.join("learning").join(format!("{region}.txt"))
    }

    pub fn models(&self) -> PathBuf {
        self.root.join("models")
    }

    pub fn relevance_model(&self) -> PathBuf {
        self.models().join("relevance.json")
    }

    pub fn sentiment_model(&self) -> PathBuf {
        self.models().join("sentiment.json")
    }

    pub fn sentiment_dir(&self) -> PathBuf {
        self.root.join("sentiment")
    }

    pub fn sentiment_accuracy(&self) -> PathBuf {
        self.sentiment_dir().join("accuracy.json")
    }

    pub fn sentiment_labels(&self, region: Region) -> PathBuf {
        self.sentiment_dir().join(format!("labels_{region}.csv"))
    }

    pub fn sentiment_series(&self, region: Region, granularity: Granularity) -> PathBuf {
        self.sentiment_dir().join(format!("series_{region}_{}.csv", granularity.as_str()))
    }

    pub fn results_dir(&self) -> PathBuf {
        self.root.join("results")
    }

    pub fn results(&self) -> PathBuf {
        self.results_dir().join("results.csv")
    }

    pub fn report(&self) -> PathBuf {
        self.results_dir().join("report.md")
    }
}
