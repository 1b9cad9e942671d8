use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Duration, DurationRound, Utc};
use serde::{Deserialize, Serialize};

use super::Polarity;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Hour,
    Day,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Hour => "hour",
            Granularity::Day => "day",
        }
    }

    pub fn step(self) -> Duration {
        match self {
            Granularity::Hour => Duration::hours(1),
            Granularity::Day => Duration::days(1),
        }
    }

    /// Start of the UTC hour or day containing `ts`.
    pub fn floor(self, ts: DateTime<Utc>) -> DateTime<Utc> {
        ts.duration_trunc(self.step()).expect("hour and day truncation is in range")
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hour" | "hourly" => Ok(Granularity::Hour),
            "day" | "daily" => Ok(Granularity::Day),
            other => Err(Error::Config(format!("unknown granularity {other:?} (hour or day)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSeriesBin {
    pub bin_start: DateTime<Utc>,
    pub granularity: Granularity,
    pub positive: usize,
    pub negative: usize,
}

/// Counts labeled timestamps per bin over `[start, end)`. Bins run from
/// the boundary at or before `start` up to `end`; empty bins are kept.
pub fn bin_counts(
    labeled: &[(DateTime<Utc>, Polarity)],
    granularity: Granularity,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
) -> Result<Vec<TimeSeriesBin>> {
    if start >= end {
        return Err(Error::Config(format!("empty time window [{start}, {end})")));
    }
    let first = granularity.floor(start);
    let step = granularity.step();
    let mut bins = Vec::new();
    let mut at = first;
    while at < end {
        bins.push(TimeSeriesBin { bin_start: at, granularity, positive: 0, negative: 0 });
        at += step;
    }
    for &(ts, polarity) in labeled {
        if ts < start || ts >= end {
            continue;
        }
        let i = ((granularity.floor(ts) - first).num_seconds() / step.num_seconds()) as usize;
        match polarity {
            Polarity::Positive => bins[i].positive += 1,
            Polarity::Negative => bins[i].negative += 1,
        }
    }
    Ok(bins)
}

fn format_ts(ts: DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Writes `bin_start,granularity,positive,negative`.
pub fn write_series(path: &Path, bins: &[TimeSeriesBin]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    w.write_record(["bin_start", "granularity", "positive", "negative"])?;
    for b in bins {
        w.write_record([format_ts(b.bin_start), b.granularity.as_str().to_string(), b.positive.to_string(), b.negative.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_series(path: &Path) -> Result<Vec<TimeSeriesBin>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let bad = || Error::Data(format!("{}: malformed series row {:?}", path.display(), rec));
        if rec.len() != 4 {
            return Err(bad());
        }
        out.push(TimeSeriesBin {
            bin_start: crate::corpus::parse_timestamp(&rec[0]).map_err(|_| bad())?,
            granularity: rec[1].parse().map_err(|_| bad())?,
            positive: rec[2].parse().map_err(|_| bad())?,
            negative: rec[3].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}
