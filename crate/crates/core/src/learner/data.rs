//! Labeled relevance data: `text,label[,confidence]` CSV files.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regions::DisasterType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Related,
    NotRelated,
}

impl Label {
    pub fn is_related(self) -> bool {
        self == Label::Related
    }
}

/// Where an example came from. Files with a `confidence` column are
/// crowdflower-style; files without one are crisislex-style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    CrisislexStyle,
    CrowdflowerStyle,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub text: String,
    pub label: Label,
    pub confidence: f64,
    pub source: Source,
}

impl LabeledExample {
    pub fn new(text: impl Into<String>, label: Label) -> Self {
        LabeledExample { text: text.into(), label, confidence: 1.0, source: Source::Other }
    }
}

/// One training file and the disaster type it is labeled for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingFile {
    pub path: PathBuf,
    #[serde(rename = "type")]
    pub disaster_type: DisasterType,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub rows: usize,
    pub kept: usize,
    pub undecided: usize,
    pub low_confidence: usize,
    pub unknown_label: usize,
}

/// Label normalization map. Case, surrounding whitespace, `_` and `-` are
/// ignored, so `Not_Related`, `not-related` and `not related` agree.
///
/// | raw | label |
/// |---|---|
/// | related, relevant, on topic | related |
/// | not related, not relevant, unrelated, irrelevant, off topic | not related |
/// | can't decide, cant decide | dropped |
pub fn normalize_label(raw: &str) -> Option<Option<Label>> {
    let key: String = raw
        .trim()
        .to_lowercase()
        .chars()
        .map(|c| if c == '_' || c == '-' { ' ' } else { c })
        .collect();
    let key = key.split_whitespace().collect::<Vec<_>>().join(" ");
    match key.as_str() {
        "related" | "relevant" | "on topic" => Some(Some(Label::Related)),
        "not related" | "not relevant" | "unrelated" | "irrelevant" | "off topic" => Some(Some(Label::NotRelated)),
        "can't decide" | "cant decide" | "can\u{2019}t decide" => Some(None),
        _ => None,
    }
}

/// Reads one file. Rows labeled "can't decide", rows with confidence
/// below 1 and rows with an unrecognized label are dropped and counted.
pub fn load_training_file(path: &Path) -> Result<(Vec<LabeledExample>, LoadStats)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(file);
    let headers = reader.headers().map_err(|e| Error::Data(format!("{}: {e}", path.display())))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (text_col, label_col) = match (col("text"), col("label")) {
        (Some(t), Some(l)) => (t, l),
        _ => {
            return Err(Error::Data(format!(
                "{}: training file needs `text` and `label` columns, found {:?}",
                path.display(),
                headers.iter().collect::<Vec<_>>()
            )))
        }
    };
    let conf_col = col("confidence");
    let source = if conf_col.is_some() { Source::CrowdflowerStyle } else { Source::CrisislexStyle };

    let mut stats = LoadStats::default();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        stats.rows += 1;
        let label = match normalize_label(&record[label_col]) {
            Some(Some(l)) => l,
            Some(None) => {
                stats.undecided += 1;
                continue;
            }
            None => {
                log::warn!("{}:{}: unknown label {:?}", path.display(), i + 2, &record[label_col]);
                stats.unknown_label += 1;
                continue;
            }
        };
        let confidence = match conf_col.map(|c| record[c].trim()) {
            None | Some("") => 1.0,
            Some(raw) => raw.parse::<f64>().map_err(|_| {
                Error::Data(format!("{}:{}: bad confidence {raw:?}", path.display(), i + 2))
            })?,
        };
        if confidence < 1.0 {
            stats.low_confidence += 1;
            continue;
        }
        out.push(LabeledExample { text: record[text_col].to_string(), label, confidence, source });
    }
    stats.kept = out.len();
    Ok((out, stats))
}

/// Loads every file whose type is in `types`, in the given file order.
pub fn load_training(files: &[TrainingFile], types: &[DisasterType]) -> Result<(Vec<LabeledExample>, LoadStats)> {
    let mut all = Vec::new();
    let mut total = LoadStats::default();
    for file in files.iter().filter(|f| types.contains(&f.disaster_type)) {
        let (examples, stats) = load_training_file(&file.path)?;
        log::info!(
            "{}: {} rows, kept {}, dropped {} undecided / {} low confidence / {} unknown label",
            file.path.display(),
            stats.rows,
            stats.kept,
            stats.undecided,
            stats.low_confidence,
            stats.unknown_label
        );
        total.rows += stats.rows;
        total.kept += stats.kept;
        total.undecided += stats.undecided;
        total.low_confidence += stats.low_confidence;
        total.unknown_label += stats.unknown_label;
        all.extend(examples);
    }
    Ok((all, total))
}

/// Writes examples as `text,label,confidence`.
pub fn save_training_file(path: &Path, examples: &[LabeledExample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    w.write_record(["text", "label", "confidence"])?;
    for ex in examples {
        let label = match ex.label {
            Label::Related => "related",
            Label::NotRelated => "not related",
        };
        w.write_record([ex.text.as_str(), label, &ex.confidence.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
