use std::collections::BTreeSet;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{agreement, paper_recall_counts, relevance_ratio};
use crate::error::{Error, Result};
use crate::regions::Region;

pub const RESULTS_HEADER: [&str; 10] = [
    "disaster_id",
    "region",
    "n_matching",
    "n_learning",
    "n_agreement",
    "recall_matching",
    "recall_learning",
    "relevance_matching",
    "relevance_learning",
    "spam_ratio",
];

/// Printed next to every results file: recall here is measured against
/// the agreement set, so the matching "precision" is 1 by construction.
pub const RECALL_CONVENTION: &str = "recall_* = 100 * n_agreement / n_<method>, where the agreement set (tweets both methods \
     call relevant) stands in for ground truth; under this convention each method's precision is 1 by definition. \
     relevance_* = 100 * n_<method> / region tweets after spam removal.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Matching,
    Learning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub region: Region,
    pub relevant_ids: BTreeSet<String>,
    pub total_in_region: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub disaster_id: String,
    pub region: Region,
    pub n_matching: usize,
    pub n_learning: usize,
    pub n_agreement: usize,
    pub recall_matching: Option<f64>,
    pub recall_learning: Option<f64>,
    pub relevance_matching: Option<f64>,
    pub relevance_learning: Option<f64>,
    pub spam_ratio: Option<f64>,
}

impl ComparisonRow {
    /// Row from the two methods' results on one region.
    pub fn from_results(disaster_id: &str, matching: &MethodResult, learning: &MethodResult, spam_ratio: f64) -> Result<Self> {
        if matching.method != Method::Matching || learning.method != Method::Learning {
            return Err(Error::Invariant("comparison needs one matching and one learning result".into()));
        }
        if matching.region != learning.region || matching.total_in_region != learning.total_in_region {
            return Err(Error::Invariant("matching and learning results cover different regions".into()));
        }
        for r in [matching, learning] {
            if r.relevant_ids.len() > r.total_in_region {
                return Err(Error::Invariant(format!(
                    "{:?} found {} relevant tweets in a region of {}",
                    r.method,
                    r.relevant_ids.len(),
                    r.total_in_region
                )));
            }
        }
        let n_agreement = agreement(&matching.relevant_ids, &learning.relevant_ids).len();
        Ok(Self::from_counts(
            disaster_id,
            matching.region,
            matching.relevant_ids.len(),
            learning.relevant_ids.len(),
            n_agreement,
            matching.total_in_region,
            Some(spam_ratio),
        ))
    }

    /// Row from counts alone; relevance ratios are `None` when the region
    /// total is 0.
    pub fn from_counts(
        disaster_id: &str,
        region: Region,
        n_matching: usize,
        n_learning: usize,
        n_agreement: usize,
        total_in_region: usize,
        spam_ratio: Option<f64>,
    ) -> Self {
        ComparisonRow {
            disaster_id: disaster_id.to_string(),
            region,
            n_matching,
            n_learning,
            n_agreement,
            recall_matching: paper_recall_counts(n_matching, n_agreement),
            recall_learning: paper_recall_counts(n_learning, n_agreement),
            relevance_matching: relevance_ratio(n_matching, total_in_region),
            relevance_learning: relevance_ratio(n_learning, total_in_region),
            spam_ratio,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| x.to_string())
}

fn mean<I: Iterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageRow {
    pub label: String,
    pub values: [Option<f64>; 8],
}

/// Unweighted column means over `rows`.
pub fn average(label: &str, rows: &[&ComparisonRow]) -> AverageRow {
    let col = |f: fn(&ComparisonRow) -> Option<f64>| mean(rows.iter().map(|r| f(r)));
    AverageRow {
        label: label.to_string(),
        values: [
            col(|r| Some(r.n_matching as f64)),
            col(|r| Some(r.n_learning as f64)),
            col(|r| Some(r.n_agreement as f64)),
            col(|r| r.recall_matching),
            col(|r| r.recall_learning),
            col(|r| r.relevance_matching),
            col(|r| r.relevance_learning),
            col(|r| r.spam_ratio),
        ],
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the results table: one line per row, then one `average,all` line
/// when there is at least one row. Missing values are written as `n/a`.
pub fn write_results(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.write_record([
            r.disaster_id.clone(),
            r.region.as_str().to_string(),
            r.n_matching.to_string(),
            r.n_learning.to_string(),
            r.n_agreement.to_string(),
            fmt_opt(r.recall_matching),
            fmt_opt(r.recall_learning),
            fmt_opt(r.relevance_matching),
            fmt_opt(r.relevance_learning),
            fmt_opt(r.spam_ratio),
        ])?;
    }
    if !rows.is_empty() {
        let avg = average("average", &rows.iter().collect::<Vec<_>>());
        let mut record = vec![avg.label, "all".to_string()];
        record.extend(avg.values.iter().map(|v| fmt_opt(*v)));
        w.write_record(record)?;
    }
    finish(w, path)
}

fn parse_opt(raw: &str) -> std::result::Result<Option<f64>, ()> {
    if raw == "n/a" {
        Ok(None)
    } else {
        raw.parse().map(Some).map_err(|_| ())
    }
}

/// Reads a results table back, skipping the average line.
pub fn load_results(path: &Path) -> Result<Vec<ComparisonRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    if r.headers()?.iter().ne(RESULTS_HEADER) {
        return Err(Error::Data(format!("{}: not a results table", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if &rec[1] == "all" {
            continue;
        }
        let bad = || Error::Data(format!("{}: malformed results row {:?}", path.display(), rec));
        let region = match &rec[1] {
            "affected" => Region::Affected,
            "unaffected" => Region::Unaffected,
            _ => return Err(bad()),
        };
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| bad());
        let opt = |i: usize| parse_opt(&rec[i]).map_err(|_| bad());
        rows.push(ComparisonRow {
            disaster_id: rec[0].to_string(),
            region,
            n_matching: int(2)?,
            n_learning: int(3)?,
            n_agreement: int(4)?,
            recall_matching: opt(5)?,
            recall_learning: opt(6)?,
            relevance_matching: opt(7)?,
            relevance_learning: opt(8)?,
            spam_ratio: opt(9)?,
        });
    }
    Ok(rows)
}

/// Per-region means, one line per region present.
pub fn write_region_averages(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["region"];
    header.extend(&RESULTS_HEADER[2..]);
    w.write_record(header)?;
    for region in [Region::Affected, Region::Unaffected] {
        let subset: Vec<&ComparisonRow> = rows.iter().filter(|r| r.region == region).collect();
        if subset.is_empty() {
            continue;
        }
        let avg = average(region.as_str(), &subset);
        let mut record = vec![avg.label];
        record.extend(avg.values.iter().map(|v| fmt_opt(*v)));
        w.write_record(record)?;
    }
    finish(w, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub disaster_id: String,
    pub n_improved: usize,
    pub n_conventional: usize,
}

impl ImprovementRow {
    /// Percent gain over the baseline; `None` if the baseline found nothing.
    pub fn gain_pct(&self) -> Option<f64> {
        crate::matchfilter::improvement(self.n_improved, self.n_conventional)
    }
}

/// Bar-chart data: `disaster_id,n_improved,n_conventional,improvement_pct`.
pub fn write_improvement(path: &Path, rows: &[ImprovementRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["disaster_id", "n_improved", "n_conventional", "improvement_pct"])?;
    for r in rows {
        w.write_record([r.disaster_id.clone(), r.n_improved.to_string(), r.n_conventional.to_string(), fmt_opt(r.gain_pct())])?;
    }
    finish(w, path)
}

/// Identifies the run that produced an output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStamp {
    pub config_hash: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

pub fn stamp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Writes `<path>.meta.json` next to an output file.
pub fn write_stamp(path: &Path, stamp: &RunStamp) -> Result<()> {
    let target = stamp_path(path);
    let body = serde_json::to_string_pretty(stamp)? + "\n";
    fs::write(&target, body).map_err(|e| Error::io(&target, e))
}

/// Results table, per-region averages and their stamps. Returns the files
/// written.
pub fn emit_results(path: &Path, rows: &[ComparisonRow], stamp: &RunStamp) -> Result<Vec<PathBuf>> {
    write_results(path, rows)?;
    let by_region = path.with_file_name("averages_by_region.csv");
    write_region_averages(&by_region, rows)?;
    let stamp = RunStamp { note: Some(RECALL_CONVENTION.to_string()), ..stamp.clone() };
    write_stamp(path, &stamp)?;
    write_stamp(&by_region, &stamp)?;
    Ok(vec![path.to_path_buf(), by_region])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<ComparisonRow> {
        vec![
            ComparisonRow::from_counts("napa", Region::Affected, 8548, 116_187, 3948, 374_782, Some(26.0)),
            ComparisonRow::from_counts("napa", Region::Unaffected, 851, 55_678, 430, 0, None),
        ]
    }

    #[test]
    fn two_rows_plus_average_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("results.csv");
        let stamp = RunStamp { config_hash: "abc".into(), seed: 1, note: None };
        let files = emit_results(&p, &rows(), &stamp).unwrap();
        assert_eq!(files.len(), 2);
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], RESULTS_HEADER.join(","));
        assert!(lines[2].ends_with("n/a,n/a,n/a"));
        assert!(lines[3].starts_with("average,all,4699.5,"));
        assert_eq!(load_results(&p).unwrap(), rows());
        let meta: RunStamp = serde_json::from_str(&fs::read_to_string(stamp_path(&p)).unwrap()).unwrap();
        assert_eq!(meta.config_hash, "abc");
        assert!(meta.note.unwrap().contains("agreement"));
        assert!(fs::read_to_string(dir.path().join("averages_by_region.csv")).unwrap().lines().count() == 3);
    }

    #[test]
    fn empty_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_results(&p, &[]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), RESULTS_HEADER.join(",") + "\n");
        assert!(load_results(&p).unwrap().is_empty());
    }

    #[test]
    fn from_results_checks_invariants() {
        let ids = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let m = MethodResult { method: Method::Matching, region: Region::Affected, relevant_ids: ids(&["1", "2"]), total_in_region: 10 };
        let l = MethodResult { method: Method::Learning, region: Region::Affected, relevant_ids: ids(&["2", "3", "4", "5"]), total_in_region: 10 };
        let row = ComparisonRow::from_results("x", &m, &l, 12.5).unwrap();
        assert_eq!((row.n_matching, row.n_learning, row.n_agreement), (2, 4, 1));
        assert_eq!(row.recall_matching, Some(50.0));
        assert_eq!(row.recall_learning, Some(25.0));
        assert_eq!(row.relevance_learning, Some(40.0));
        let small = MethodResult { total_in_region: 1, ..m.clone() };
        assert!(ComparisonRow::from_results("x", &small, &MethodResult { total_in_region: 1, ..l.clone() }, 0.0).is_err());
        assert!(ComparisonRow::from_results("x", &l, &m, 0.0).is_err());
    }

    #[test]
    fn improvement_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("imp.csv");
        let rows = vec![
            ImprovementRow { disaster_id: "a".into(), n_improved: 180, n_conventional: 100 },
            ImprovementRow { disaster_id: "b".into(), n_improved: 5, n_conventional: 0 },
        ];
        write_improvement(&p, &rows).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "disaster_id,n_improved,n_conventional,improvement_pct\na,180,100,80\nb,5,0,n/a\n");
    }
}
