//! Disaster manifests and the affected/unaffected split of a corpus.

mod geometry;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tweet};
use crate::error::{Error, Result};

pub use geometry::{CountyGeometry, Polygon, Ring};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisasterType {
    Earthquake,
    Flood,
    Wildfire,
}

impl DisasterType {
    pub const ALL: [DisasterType; 3] = [DisasterType::Earthquake, DisasterType::Flood, DisasterType::Wildfire];

    pub fn as_str(self) -> &'static str {
        match self {
            DisasterType::Earthquake => "earthquake",
            DisasterType::Flood => "flood",
            DisasterType::Wildfire => "wildfire",
        }
    }
}

impl fmt::Display for DisasterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DisasterType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "earthquake" => Ok(DisasterType::Earthquake),
            "flood" => Ok(DisasterType::Flood),
            "wildfire" => Ok(DisasterType::Wildfire),
            other => Err(Error::Config(format!("unknown disaster type {other:?}"))),
        }
    }
}

/// A declared disaster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisasterManifest {
    pub disaster_id: String,
    pub fema_code: String,
    pub types: BTreeSet<DisasterType>,
    pub start_date: NaiveDate,
    pub duration_days: u32,
    pub affected_fips: BTreeSet<String>,
    /// Empty means "every county of the affected states" (resolved against
    /// the geometry).
    #[serde(default)]
    pub vicinity_fips: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyword_overrides: Option<Vec<String>>,
    /// Lowercase place name used by conventional `#<area><type>` hashtags.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_name: Option<String>,
    /// Official event hashtag such as `hurricanesandy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub official_name: Option<String>,
}

impl DisasterManifest {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: DisasterManifest =
            serde_json::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.types.is_empty() {
            return Err(Error::Config(format!("{}: no disaster types", self.disaster_id)));
        }
        if self.duration_days == 0 {
            return Err(Error::Config(format!("{}: duration_days must be >= 1", self.disaster_id)));
        }
        if !self.vicinity_fips.is_empty() && !self.affected_fips.is_subset(&self.vicinity_fips) {
            return Err(Error::Config(format!("{}: affected counties must be part of the vicinity", self.disaster_id)));
        }
        Ok(())
    }

    /// Half-open time window `[start 00:00 UTC, start + duration_days)`.
    pub fn window(&self) -> (DateTime<Utc>, DateTime<Utc>) {
        let start = self.start_date.and_hms_opt(0, 0, 0).expect("midnight").and_utc();
        (start, start + Duration::days(i64::from(self.duration_days)))
    }

    pub fn in_window(&self, ts: DateTime<Utc>) -> bool {
        let (start, end) = self.window();
        ts >= start && ts < end
    }

    /// Explicit vicinity, or all geometry counties sharing a state prefix
    /// with an affected county.
    pub fn resolved_vicinity(&self, geom: Option<&CountyGeometry>) -> BTreeSet<String> {
        if !self.vicinity_fips.is_empty() {
            return self.vicinity_fips.clone();
        }
        let states: BTreeSet<&str> = self.affected_fips.iter().filter_map(|f| f.get(..2)).collect();
        let mut vicinity = self.affected_fips.clone();
        if let Some(geom) = geom {
            vicinity.extend(
                geom.fips()
                    .filter(|f| f.get(..2).is_some_and(|s| states.contains(s)))
                    .map(str::to_string),
            );
        }
        vicinity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Affected,
    Unaffected,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Affected => "affected",
            Region::Unaffected => "unaffected",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct RegionPartition {
    pub affected: Corpus,
    pub unaffected: Corpus,
    pub dropped_outside: usize,
    pub dropped_out_of_window: usize,
}

impl RegionPartition {
    pub fn region(&self, region: Region) -> &Corpus {
        match region {
            Region::Affected => &self.affected,
            Region::Unaffected => &self.unaffected,
        }
    }
}

/// Splits in-window tweets by county. A pre-tagged `fips` wins over the
/// geometry lookup.
pub fn partition(corpus: &Corpus, manifest: &DisasterManifest, geom: Option<&CountyGeometry>) -> Result<RegionPartition> {
    manifest.validate()?;
    let vicinity = manifest.resolved_vicinity(geom);
    let needs_lookup = corpus.tweets().iter().any(|t| t.county_fips.is_none() && t.lat.is_some());
    if needs_lookup {
        let missing: Vec<&String> = vicinity.iter().filter(|f| !geom.is_some_and(|g| g.contains_fips(f))).collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "{}: tweets need a geometry lookup but counties {missing:?} have no geometry",
                manifest.disaster_id
            )));
        }
    }

    let mut lookups: HashMap<usize, Option<String>> = HashMap::new();
    let county_of = |i: usize, t: &Tweet, lookups: &mut HashMap<usize, Option<String>>| -> Option<String> {
        if let Some(f) = &t.county_fips {
            return Some(f.clone());
        }
        let (lat, lon) = (t.lat?, t.lon?);
        lookups
            .entry(i)
            .or_insert_with(|| geom.and_then(|g| g.assign_county(lat, lon)).map(str::to_string))
            .clone()
    };

    let mut affected = Vec::new();
    let mut unaffected = Vec::new();
    let mut dropped_outside = 0;
    let mut dropped_out_of_window = 0;
    for (i, tweet) in corpus.tweets().iter().enumerate() {
        if !manifest.in_window(tweet.timestamp) {
            dropped_out_of_window += 1;
            continue;
        }
        match county_of(i, tweet, &mut lookups) {
            Some(f) if manifest.affected_fips.contains(&f) => affected.push(tweet.clone()),
            Some(f) if vicinity.contains(&f) => unaffected.push(tweet.clone()),
            _ => dropped_outside += 1,
        }
    }
    Ok(RegionPartition {
        affected: Corpus::new(affected)?,
        unaffected: Corpus::new(unaffected)?,
        dropped_outside,
        dropped_out_of_window,
    })
}
