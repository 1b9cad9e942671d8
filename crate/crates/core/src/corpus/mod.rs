//! Tweet data model, JSON Lines ingestion, tokenization, hashtag
//! dictionaries and spam-user removal.

mod hashtags;
mod spam;
mod tokenize;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hashtags::{build_hashtag_dict, segment_hashtag, segmentation_wordlist, HashtagDict};
pub use spam::{remove_spam, spam_users, SpamStats, DEFAULT_SPAM_THRESHOLD};
pub use tokenize::{EmojiTable, Tokenizer};

/// One geotagged message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    #[serde(rename = "id")]
    pub tweet_id: String,
    #[serde(rename = "user")]
    pub user_id: String,
    #[serde(rename = "ts", with = "ts_format")]
    pub timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
    pub text: String,
    #[serde(rename = "rt", default)]
    pub is_retweet: bool,
    #[serde(rename = "fips", default, skip_serializing_if = "Option::is_none")]
    pub county_fips: Option<String>,
}

impl Tweet {
    pub fn new(
        tweet_id: impl Into<String>,
        user_id: impl Into<String>,
        timestamp: DateTime<Utc>,
        text: impl Into<String>,
    ) -> Self {
        Tweet {
            tweet_id: tweet_id.into(),
            user_id: user_id.into(),
            timestamp,
            lat: None,
            lon: None,
            text: text.into(),
            is_retweet: false,
            county_fips: None,
        }
    }

    pub fn with_location(mut self, lat: f64, lon: f64) -> Self {
        self.lat = Some(lat);
        self.lon = Some(lon);
        self
    }

    pub fn with_fips(mut self, fips: impl Into<String>) -> Self {
        self.county_fips = Some(fips.into());
        self
    }

    /// UTC calendar day of the timestamp.
    pub fn day(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.tweet_id.is_empty() {
            return Err("empty id".into());
        }
        if self.user_id.is_empty() {
            return Err("empty user".into());
        }
        match (self.lat, self.lon) {
            (Some(lat), Some(lon)) => {
                if !(-90.0..=90.0).contains(&lat) {
                    return Err(format!("lat {lat} out of range"));
                }
                if !(-180.0..=180.0).contains(&lon) {
                    return Err(format!("lon {lon} out of range"));
                }
            }
            (None, None) => {}
            _ => return Err("lat and lon must be given together".into()),
        }
        Ok(())
    }
}

/// Timestamps are written as `YYYY-MM-DDTHH:MM:SSZ`.
mod ts_format {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ts.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_timestamp(&raw).map_err(serde::de::Error::custom)
    }
}

/// Parses an ISO-8601 instant; a missing offset is read as UTC.
pub fn parse_timestamp(raw: &str) -> std::result::Result<DateTime<Utc>, String> {
    if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
        return Ok(ts.with_timezone(&Utc));
    }
    chrono::NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| chrono::NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S"))
        .map(|naive| naive.and_utc())
        .map_err(|e| format!("bad timestamp {raw:?}: {e}"))
}

/// Ordered tweet list with per-user and per-UTC-day indexes.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    by_id: HashMap<String, usize>,
    by_user: BTreeMap<String, Vec<usize>>,
    by_day: BTreeMap<NaiveDate, Vec<usize>>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate tweet ids.
    pub fn new(tweets: Vec<Tweet>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for tweet in tweets {
            corpus.push(tweet)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, tweet: Tweet) -> Result<()> {
        if self.by_id.contains_key(&tweet.tweet_id) {
            return Err(Error::Data(format!("duplicate tweet id {}", tweet.tweet_id)));
        }
        let idx = self.tweets.len();
        self.by_id.insert(tweet.tweet_id.clone(), idx);
        self.by_user.entry(tweet.user_id.clone()).or_default().push(idx);
        self.by_day.entry(tweet.day()).or_default().push(idx);
        self.tweets.push(tweet);
        Ok(())
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn get(&self, tweet_id: &str) -> Option<&Tweet> {
        self.by_id.get(tweet_id).map(|&i| &self.tweets[i])
    }

    pub fn contains(&self, tweet_id: &str) -> bool {
        self.by_id.contains_key(tweet_id)
    }

    /// Tweets of `user_id`, in corpus order.
    pub fn user_tweets<'a>(&'a self, user_id: &str) -> impl Iterator<Item = &'a Tweet> + 'a {
        self.by_user
            .get(user_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.tweets[i])
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.by_user.keys().map(String::as_str)
    }

    pub fn user_count(&self) -> usize {
        self.by_user.len()
    }

    pub fn day_tweets<'a>(&'a self, day: NaiveDate) -> impl Iterator<Item = &'a Tweet> + 'a {
        self.by_day
            .get(&day)
            .into_iter()
            .flatten()
            .map(move |&i| &self.tweets[i])
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.by_day.keys().copied()
    }

    /// Per-user, per-UTC-day tweet counts.
    pub(crate) fn user_day_counts(&self) -> BTreeMap<&str, BTreeMap<NaiveDate, usize>> {
        let mut counts: BTreeMap<&str, BTreeMap<NaiveDate, usize>> = BTreeMap::new();
        for (user, idxs) in &self.by_user {
            let per_day = counts.entry(user.as_str()).or_default();
            for &i in idxs {
                *per_day.entry(self.tweets[i].day()).or_default() += 1;
            }
        }
        counts
    }

    /// New corpus holding the tweets accepted by `keep`, order preserved.
    pub fn filter(&self, mut keep: impl FnMut(&Tweet) -> bool) -> Corpus {
        let kept = self.tweets.iter().filter(|t| keep(t)).cloned().collect();
        // ids are already unique
        Corpus::new(kept).expect("subset of a valid corpus")
    }

    pub fn into_tweets(self) -> Vec<Tweet> {
        self.tweets
    }

    /// Writes the corpus as JSON Lines in the ingestion format.
    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for tweet in &self.tweets {
            let line = serde_json::to_string(tweet)?;
            writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// A record that could not be ingested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct LoadReport {
    pub corpus: Corpus,
    pub errors: Vec<LineError>,
}

/// Reads a JSON Lines tweet file. Malformed or incomplete records are
/// skipped and reported with their 1-based line number; blank lines are
/// ignored.
pub fn load_corpus(path: &Path) -> Result<LoadReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut corpus = Corpus::default();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Tweet>(&line)
            .map_err(|e| e.to_string())
            .and_then(|t| t.validate().map(|_| t));
        match parsed {
            Ok(tweet) => {
                if let Err(e) = corpus.push(tweet) {
                    errors.push(LineError { line: line_no, message: e.to_string() });
                }
            }
            Err(message) => errors.push(LineError { line: line_no, message }),
        }
    }
    for e in &errors {
        log::warn!("{}:{}: {}", path.display(), e.line, e.message);
    }
    Ok(LoadReport { corpus, errors })
}
