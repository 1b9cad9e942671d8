//! Tweet polarity from paragraph vectors plus logistic regression, and
//! hourly/daily aggregation of predicted polarity.

mod series;

use std::fs::{self, File};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Tokenizer, Tweet};
use crate::error::{Error, Result};
use crate::features::{train_doc2vec, Doc2VecConfig, DocEmbeddings};
use crate::learner::{train_logreg, LogRegConfig, LogRegModel};

pub use series::{bin_counts, load_series, write_series, Granularity, TimeSeriesBin};

pub const SENTIMENT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Negative => "negative",
            Polarity::Positive => "positive",
        }
    }

    /// Accepts `0`/`4` as well as `neg`/`pos` and the full words.
    pub fn parse(raw: &str) -> Option<Polarity> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "0" | "neg" | "negative" => Some(Polarity::Negative),
            "4" | "pos" | "positive" => Some(Polarity::Positive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentExample {
    pub text: String,
    pub polarity: Polarity,
}

impl SentimentExample {
    pub fn new(text: impl Into<String>, polarity: Polarity) -> Self {
        SentimentExample { text: text.into(), polarity }
    }
}

/// Reads `polarity,text` rows. A headerless six-column file in the
/// original Sentiment140 layout (polarity first, text last) is read too.
/// Rows with other polarities (e.g. 2, neutral) are skipped.
pub fn load_sentiment_file(path: &Path) -> Result<Vec<SentimentExample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut records = reader.records();
    let first = match records.next() {
        None => return Ok(Vec::new()),
        Some(r) => r.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?,
    };
    let header: Vec<String> = first.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let (pol_col, text_col, mut pending) = match (
        header.iter().position(|h| h == "polarity"),
        header.iter().position(|h| h == "text"),
    ) {
        (Some(p), Some(t)) => (p, t, None),
        _ if first.len() == 6 && Polarity::parse(&first[0]).is_some() || first.len() == 6 && first[0].trim() == "2" => {
            (0, 5, Some(first))
        }
        _ => {
            return Err(Error::Data(format!(
                "{}: sentiment file needs a `polarity,text` header",
                path.display()
            )))
        }
    };
    let mut out = Vec::new();
    let mut skipped = 0usize;
    loop {
        let record = match pending.take() {
            Some(r) => r,
            None => match records.next() {
                None => break,
                Some(r) => r.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?,
            },
        };
        let (Some(p), Some(t)) = (record.get(pol_col), record.get(text_col)) else {
            return Err(Error::Data(format!("{}: short row {:?}", path.display(), record)));
        };
        match Polarity::parse(p) {
            Some(polarity) => out.push(SentimentExample::new(t, polarity)),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::info!("{}: skipped {skipped} rows with unsupported polarity", path.display());
    }
    Ok(out)
}

pub fn save_sentiment_file(path: &Path, examples: &[SentimentExample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    w.write_record(["polarity", "text"])?;
    for ex in examples {
        let code = match ex.polarity {
            Polarity::Negative => "0",
            Polarity::Positive => "4",
        };
        w.write_record([code, ex.text.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SentimentConfig {
    pub doc2vec: Doc2VecConfig,
    pub logreg: LogRegConfig,
    pub threshold: f64,
}

impl Default for SentimentConfig {
    fn default() -> Self {
        SentimentConfig {
            doc2vec: Doc2VecConfig::default(),
            logreg: LogRegConfig { learning_rate: 1.0, epochs: 500, ..LogRegConfig::default() },
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentModel {
    pub format_version: u32,
    pub embeddings: DocEmbeddings,
    pub classifier: LogRegModel,
    pub threshold: f64,
}

/// 64-bit FNV-1a, used to derive per-tweet inference seeds.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

impl SentimentModel {
    pub fn probability(&self, text: &str, seed: u64, tokenizer: &Tokenizer) -> f64 {
        let v = self.embeddings.infer_vector(&tokenizer.tokenize(text), seed);
        self.classifier.probability(&v)
    }

    pub fn predict_text(&self, text: &str, seed: u64, tokenizer: &Tokenizer) -> Polarity {
        if self.probability(text, seed, tokenizer) >= self.threshold {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: SentimentModel = serde_json::from_str(&raw)?;
        if m.format_version != SENTIMENT_FORMAT_VERSION {
            return Err(Error::Data(format!("sentiment model format version {} not supported", m.format_version)));
        }
        if m.embeddings.dim() != m.classifier.dim() {
            return Err(Error::Invariant("sentiment model dimensions disagree".into()));
        }
        Ok(m)
    }
}

/// Trains paragraph vectors over train, test and `unlabeled` texts
/// together, then a classifier on the training vectors. Accuracy is
/// measured on the test vectors and is `None` when `test` is empty.
pub fn train_sentiment(
    train: &[SentimentExample],
    test: &[SentimentExample],
    unlabeled: &[String],
    tokenizer: &Tokenizer,
    config: &SentimentConfig,
    seed: u64,
) -> Result<(SentimentModel, Option<f64>)> {
    let n_pos = train.iter().filter(|e| e.polarity == Polarity::Positive).count();
    if n_pos == 0 || n_pos == train.len() {
        return Err(Error::Data("sentiment training needs both positive and negative examples".into()));
    }
    let docs: Vec<Vec<String>> = train
        .iter()
        .chain(test)
        .map(|e| e.text.as_str())
        .chain(unlabeled.iter().map(String::as_str))
        .map(|t| tokenizer.tokenize(t))
        .collect();
    let d2v = Doc2VecConfig { seed, ..config.doc2vec };
    let embeddings = train_doc2vec(&docs, &d2v)?;
    let x: Vec<Vec<f64>> = (0..train.len()).map(|i| embeddings.doc_vector(i).to_vec()).collect();
    let y: Vec<bool> = train.iter().map(|e| e.polarity == Polarity::Positive).collect();
    let classifier = train_logreg(&x, &y, &config.logreg)?;

    let accuracy = if test.is_empty() {
        None
    } else {
        let correct = test
            .iter()
            .enumerate()
            .filter(|(i, e)| {
                let p = classifier.probability(embeddings.doc_vector(train.len() + i));
                (p >= config.threshold) == (e.polarity == Polarity::Positive)
            })
            .count();
        Some(correct as f64 / test.len() as f64)
    };
    let model = SentimentModel { format_version: SENTIMENT_FORMAT_VERSION, embeddings, classifier, threshold: config.threshold };
    Ok((model, accuracy))
}

/// One label per tweet, in input order. Each tweet's inference seed is
/// the FNV-1a hash of its id, so a label does not depend on its batch.
pub fn predict_sentiment(tweets: &[Tweet], model: &SentimentModel, tokenizer: &Tokenizer) -> Vec<Polarity> {
    tweets.iter().map(|t| model.predict_text(&t.text, fnv1a(t.tweet_id.as_bytes()), tokenizer)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn polarity_codes() {
        assert_eq!(Polarity::parse("0"), Some(Polarity::Negative));
        assert_eq!(Polarity::parse(" POS"), Some(Polarity::Positive));
        assert_eq!(Polarity::parse("2"), None);
    }

    #[test]
    fn reads_headed_and_raw_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let headed = dir.path().join("a.csv");
        save_sentiment_file(&headed, &[SentimentExample::new("so good, really", Polarity::Positive)]).unwrap();
        assert_eq!(load_sentiment_file(&headed).unwrap(), vec![SentimentExample::new("so good, really", Polarity::Positive)]);

        let raw = dir.path().join("b.csv");
        fs::write(
            &raw,
            "\"0\",\"1\",\"Mon Apr 06\",\"NO_QUERY\",\"u\",\"awful day\"\n\"2\",\"2\",\"d\",\"q\",\"u\",\"meh\"\n\"4\",\"3\",\"d\",\"q\",\"u\",\"great\"\n",
        )
        .unwrap();
        let ex = load_sentiment_file(&raw).unwrap();
        assert_eq!(ex, vec![SentimentExample::new("awful day", Polarity::Negative), SentimentExample::new("great", Polarity::Positive)]);

        let bad = dir.path().join("c.csv");
        fs::write(&bad, "label,tweet\n0,x\n").unwrap();
        assert!(load_sentiment_file(&bad).is_err());
    }

    #[test]
    fn single_class_rejected_and_empty_test_is_na() {
        let tok = Tokenizer::default();
        let cfg = SentimentConfig {
            doc2vec: Doc2VecConfig { dim: 8, epochs: 2, subsample: 0.0, ..Default::default() },
            ..Default::default()
        };
        let pos = vec![SentimentExample::new("good", Polarity::Positive)];
        assert!(train_sentiment(&pos, &[], &[], &tok, &cfg, 1).is_err());
        let train = vec![SentimentExample::new("good day", Polarity::Positive), SentimentExample::new("bad day", Polarity::Negative)];
        let (model, acc) = train_sentiment(&train, &[], &[], &tok, &cfg, 1).unwrap();
        assert_eq!(acc, None);
        // empty text infers the zero vector, so the label comes from the bias alone
        let expected = if crate::features::sgns::sigmoid(model.classifier.bias) >= 0.5 { Polarity::Positive } else { Polarity::Negative };
        assert_eq!(model.predict_text("", 7, &tok), expected);
    }
}
