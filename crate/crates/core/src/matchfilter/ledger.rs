//! Persistent hashtag review decisions (`hashtag,count,status,decided_at,note`).

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::parse_timestamp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashtagStatus {
    Candidate,
    Accepted,
    Rejected,
}

impl fmt::Display for HashtagStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HashtagStatus::Candidate => "candidate",
            HashtagStatus::Accepted => "accepted",
            HashtagStatus::Rejected => "rejected",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub hashtag: String,
    pub count: usize,
    pub status: HashtagStatus,
    pub decided_at: Option<DateTime<Utc>>,
    pub note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    hashtag: String,
    count: usize,
    status: HashtagStatus,
    decided_at: String,
    note: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HashtagLedger {
    entries: Vec<LedgerEntry>,
}

impl HashtagLedger {
    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, hashtag: &str) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.hashtag == hashtag)
    }

    pub fn with_status(&self, status: HashtagStatus) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.iter().filter(move |e| e.status == status)
    }

    pub fn accepted(&self) -> BTreeSet<String> {
        self.with_status(HashtagStatus::Accepted).map(|e| e.hashtag.clone()).collect()
    }

    pub fn rejected(&self) -> BTreeSet<String> {
        self.with_status(HashtagStatus::Rejected).map(|e| e.hashtag.clone()).collect()
    }

    /// Adds unseen hashtags as candidates; existing entries are left as they are.
    /// Returns how many were added.
    pub fn merge_candidates<'a>(&mut self, candidates: impl IntoIterator<Item = (&'a str, usize)>) -> usize {
        let mut added = 0;
        for (tag, count) in candidates {
            if self.get(tag).is_none() {
                self.entries.push(LedgerEntry {
                    hashtag: tag.to_string(),
                    count,
                    status: HashtagStatus::Candidate,
                    decided_at: None,
                    note: None,
                });
                added += 1;
            }
        }
        added
    }

    /// Records a decision. Only status, timestamp and note change.
    pub fn decide(&mut self, hashtag: &str, status: HashtagStatus, at: DateTime<Utc>, note: Option<String>) -> Result<()> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| e.hashtag == hashtag)
            .ok_or_else(|| Error::Data(format!("hashtag {hashtag:?} not in ledger")))?;
        entry.status = status;
        entry.decided_at = (status != HashtagStatus::Candidate).then_some(at);
        entry.note = note;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if e.hashtag.is_empty() || e.hashtag.contains('#') {
                return Err(Error::Data(format!("ledger: bad hashtag {:?}", e.hashtag)));
            }
            if !seen.insert(e.hashtag.as_str()) {
                return Err(Error::Data(format!("ledger: duplicate hashtag {:?}", e.hashtag)));
            }
            if e.status != HashtagStatus::Candidate && e.decided_at.is_none() {
                return Err(Error::Data(format!("ledger: {} entry {:?} lacks decided_at", e.status, e.hashtag)));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&raw)
    }

    pub fn from_csv(raw: &[u8]) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(raw);
        let mut entries = Vec::new();
        for row in reader.deserialize::<Row>() {
            let row = row?;
            let decided_at = match row.decided_at.trim() {
                "" => None,
                s => Some(parse_timestamp(s).map_err(Error::Data)?),
            };
            entries.push(LedgerEntry {
                hashtag: row.hashtag,
                count: row.count,
                status: row.status,
                decided_at,
                note: (!row.note.is_empty()).then_some(row.note),
            });
        }
        let ledger = HashtagLedger { entries };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            writer.serialize(Row {
                hashtag: e.hashtag.clone(),
                count: e.count,
                status: e.status,
                decided_at: e
                    .decided_at
                    .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
                    .unwrap_or_default(),
                note: e.note.clone().unwrap_or_default(),
            })?;
        }
        if self.entries.is_empty() {
            writer.write_record(["hashtag", "count", "status", "decided_at", "note"])?;
        }
        writer.into_inner().map_err(|e| Error::Data(e.to_string()))
    }

    /// Writes via a temporary file and rename, so a failed write leaves the
    /// previous file untouched.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let bytes = self.to_csv()?;
        let tmp = path.with_extension("csv.tmp");
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(&bytes).map_err(|e| Error::io(&tmp, e))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 1, 2, 3, 4, 5).unwrap()
    }

    #[test]
    fn csv_round_trip_and_header() {
        let mut l = HashtagLedger::default();
        l.merge_candidates([("napaquake", 12), ("fireworks", 3)]);
        l.decide("napaquake", HashtagStatus::Accepted, t0(), Some("clearly, relevant".into())).unwrap();
        let bytes = l.to_csv().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("hashtag,count,status,decided_at,note\n"));
        assert!(text.contains("napaquake,12,accepted,2024-01-02T03:04:05Z,\"clearly, relevant\""));
        assert_eq!(HashtagLedger::from_csv(&bytes).unwrap(), l);
    }

    #[test]
    fn empty_ledger_has_header() {
        let bytes = HashtagLedger::default().to_csv().unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "hashtag,count,status,decided_at,note\n");
        assert!(HashtagLedger::from_csv(b"hashtag,count,status,decided_at,note\n").unwrap().is_empty());
    }

    #[test]
    fn merge_keeps_existing_decisions() {
        let mut l = HashtagLedger::default();
        l.merge_candidates([("a", 1)]);
        l.decide("a", HashtagStatus::Rejected, t0(), None).unwrap();
        assert_eq!(l.merge_candidates([("a", 9), ("b", 2)]), 1);
        assert_eq!(l.get("a").unwrap().status, HashtagStatus::Rejected);
        assert_eq!(l.get("a").unwrap().count, 1);
    }

    #[test]
    fn invalid_files_rejected() {
        let dup = b"hashtag,count,status,decided_at,note\na,1,candidate,,\na,2,candidate,,\n";
        assert!(HashtagLedger::from_csv(dup).is_err());
        let undated = b"hashtag,count,status,decided_at,note\na,1,accepted,,\n";
        assert!(HashtagLedger::from_csv(undated).is_err());
        let bad_status = b"hashtag,count,status,decided_at,note\na,1,maybe,,\n";
        assert!(HashtagLedger::from_csv(bad_status).is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.csv");
        let mut l = HashtagLedger::default();
        l.merge_candidates([("x", 4)]);
        l.save(&path).unwrap();
        assert_eq!(HashtagLedger::load(&path).unwrap(), l);
        assert!(!path.with_extension("csv.tmp").exists());
    }
}
