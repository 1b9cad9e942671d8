//! Interactive accept/reject session over candidate hashtags.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions, TryLockError};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

use super::ledger::{HashtagLedger, HashtagStatus, LedgerEntry};
use crate::corpus::{Corpus, Tokenizer};
use crate::error::{Error, Result};

pub const MAX_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Accept(Option<String>),
    Reject(Option<String>),
    Skip,
    Quit,
}

/// Source of reviewer decisions.
pub trait Reviewer {
    fn decide(&mut self, entry: &LedgerEntry, samples: &[String], remaining: usize) -> Result<Decision>;
}

/// Line-oriented terminal reviewer: `a`, `r`, `s` or `q`, optionally
/// followed by a note (`r fireworks, not wildfire`).
pub struct TerminalReviewer<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> TerminalReviewer<R, W> {
    pub fn new(input: R, output: W) -> Self {
        TerminalReviewer { input, output }
    }
}

impl<R: BufRead, W: Write> Reviewer for TerminalReviewer<R, W> {
    fn decide(&mut self, entry: &LedgerEntry, samples: &[String], remaining: usize) -> Result<Decision> {
        let io_err = |e| Error::io("<terminal>", e);
        writeln!(self.output, "\n#{}  ({} occurrences, {} left)", entry.hashtag, entry.count, remaining).map_err(io_err)?;
        for s in samples {
            writeln!(self.output, "    > {s}").map_err(io_err)?;
        }
        loop {
            write!(self.output, "[a]ccept / [r]eject / [s]kip / [q]uit: ").map_err(io_err)?;
            self.output.flush().map_err(io_err)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io_err)? == 0 {
                return Ok(Decision::Quit);
            }
            let line = line.trim();
            let (key, note) = match line.split_once(char::is_whitespace) {
                Some((k, n)) => (k, Some(n.trim().to_string()).filter(|n| !n.is_empty())),
                None => (line, None),
            };
            match key {
                "a" => return Ok(Decision::Accept(note)),
                "r" => return Ok(Decision::Reject(note)),
                "s" => return Ok(Decision::Skip),
                "q" => return Ok(Decision::Quit),
                _ => writeln!(self.output, "unrecognized input {line:?}").map_err(io_err)?,
            }
        }
    }
}

/// Exclusive advisory lock on `<ledger>.lock`, held for a review session.
pub struct LedgerLock {
    _file: File,
    path: PathBuf,
}

impl LedgerLock {
    pub fn acquire(ledger_path: &Path) -> Result<Self> {
        let mut os = ledger_path.as_os_str().to_owned();
        os.push(".lock");
        let path = PathBuf::from(os);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        match file.try_lock() {
            Ok(()) => Ok(LedgerLock { _file: file, path }),
            Err(TryLockError::WouldBlock) => Err(Error::Config(format!(
                "ledger {} is locked by another review session",
                ledger_path.display()
            ))),
            Err(TryLockError::Error(e)) => Err(Error::io(&path, e)),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// (timestamp, tweet id, text) per hashtag.
type Hits<'a> = BTreeMap<String, Vec<(DateTime<Utc>, &'a str, &'a str)>>;

/// Up to [`MAX_SAMPLES`] most recent tweet texts carrying each hashtag.
pub fn sample_tweets(corpus: &Corpus, tokenizer: &Tokenizer, hashtags: &[String]) -> BTreeMap<String, Vec<String>> {
    let wanted: BTreeMap<&str, ()> = hashtags.iter().map(|h| (h.as_str(), ())).collect();
    let mut hits: Hits = BTreeMap::new();
    for t in corpus.tweets() {
        for token in tokenizer.tokenize(&t.text) {
            if let Some(tag) = token.strip_prefix('#') {
                if wanted.contains_key(tag) {
                    hits.entry(tag.to_string()).or_default().push((t.timestamp, &t.tweet_id, &t.text));
                }
            }
        }
    }
    hits.into_iter()
        .map(|(tag, mut v)| {
            v.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
            v.dedup_by(|a, b| a.1 == b.1);
            (tag, v.into_iter().take(MAX_SAMPLES).map(|(_, _, text)| text.to_string()).collect())
        })
        .collect()
}

/// Summary of one review session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReviewOutcome {
    pub accepted: usize,
    pub rejected: usize,
    pub skipped: usize,
    pub quit: bool,
}

/// Walks the candidate entries in ledger order, persisting the ledger to
/// `path` after every accept/reject. Skipped entries stay candidates and
/// come back in the next session.
pub fn review(
    ledger: &mut HashtagLedger,
    path: &Path,
    samples: &BTreeMap<String, Vec<String>>,
    reviewer: &mut dyn Reviewer,
    mut now: impl FnMut() -> DateTime<Utc>,
) -> Result<ReviewOutcome> {
    let _lock = LedgerLock::acquire(path)?;
    let pending: Vec<String> = ledger
        .with_status(HashtagStatus::Candidate)
        .map(|e| e.hashtag.clone())
        .collect();
    let mut outcome = ReviewOutcome::default();
    for (i, tag) in pending.iter().enumerate() {
        let entry = ledger.get(tag).expect("pending entry").clone();
        let shown = samples.get(tag).map(Vec::as_slice).unwrap_or(&[]);
        let decision = reviewer.decide(&entry, shown, pending.len() - i)?;
        let (status, note) = match decision {
            Decision::Accept(note) => (HashtagStatus::Accepted, note),
            Decision::Reject(note) => (HashtagStatus::Rejected, note),
            Decision::Skip => {
                outcome.skipped += 1;
                continue;
            }
            Decision::Quit => {
                outcome.quit = true;
                break;
            }
        };
        let previous = ledger.clone();
        ledger.decide(tag, status, now(), note)?;
        if let Err(e) = ledger.save(path) {
            *ledger = previous;
            return Err(e);
        }
        match status {
            HashtagStatus::Accepted => outcome.accepted += 1,
            _ => outcome.rejected += 1,
        }
    }
    Ok(outcome)
}
