//! Per-disaster-type relevance pipeline: tokenize, featurize, classify.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{train_logreg, Label, LabeledExample, LogRegConfig, LogRegModel};
use crate::corpus::{segmentation_wordlist, Corpus, Tokenizer};
use crate::error::{Error, Result};
use crate::features::{
    bow, build_vocab, doc_vector_avg, lsi_fit_with, tfidf_fit, tfidf_transform, train_word2vec, IdfWeights, LsiConfig,
    LsiModel, Vocabulary, Word2VecConfig, WordEmbeddings,
};
use crate::regions::DisasterType;

pub const PIPELINE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Featurization {
    #[default]
    TfidfLsi,
    Word2vecAvg,
}

impl std::str::FromStr for Featurization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfidf_lsi" => Ok(Featurization::TfidfLsi),
            "word2vec_avg" => Ok(Featurization::Word2vecAvg),
            other => Err(Error::Config(format!("unknown featurization {other:?} (tfidf_lsi or word2vec_avg)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelevanceConfig {
    pub featurization: Featurization,
    pub min_count: usize,
    /// LSI dimension; `None` means `min(100, V, N)`.
    pub lsi_k: Option<usize>,
    pub lsi: LsiConfig,
    pub word2vec: Word2VecConfig,
    pub logreg: LogRegConfig,
    pub threshold: f64,
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        RelevanceConfig {
            featurization: Featurization::TfidfLsi,
            min_count: 2,
            lsi_k: None,
            lsi: LsiConfig::default(),
            word2vec: Word2VecConfig::default(),
            logreg: LogRegConfig::default(),
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Featurizer {
    TfidfLsi { vocab: Vocabulary, idf: IdfWeights, lsi: LsiModel },
    Word2vecAvg { embeddings: WordEmbeddings },
}

impl Featurizer {
    pub fn dim(&self) -> usize {
        match self {
            Featurizer::TfidfLsi { lsi, .. } => lsi.k(),
            Featurizer::Word2vecAvg { embeddings } => embeddings.dim(),
        }
    }

    pub fn featurize(&self, tokens: &[String]) -> Vec<f64> {
        match self {
            Featurizer::TfidfLsi { vocab, idf, lsi } => lsi.project(&tfidf_transform(&bow(tokens, vocab), idf)),
            Featurizer::Word2vecAvg { embeddings } => doc_vector_avg(tokens, embeddings),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelevancePipeline {
    pub format_version: u32,
    pub types: BTreeSet<DisasterType>,
    pub featurizer: Featurizer,
    pub model: LogRegModel,
    pub threshold: f64,
    /// Hashtag segmentation lexicon.
    pub wordlist: BTreeSet<String>,
    #[serde(skip)]
    lookup: HashSet<String>,
}

impl PartialEq for RelevancePipeline {
    fn eq(&self, other: &Self) -> bool {
        self.format_version == other.format_version
            && self.types == other.types
            && self.featurizer == other.featurizer
            && self.model == other.model
            && self.threshold == other.threshold
            && self.wordlist == other.wordlist
    }
}

impl RelevancePipeline {
    pub fn tokens(&self, text: &str, tokenizer: &Tokenizer) -> Vec<String> {
        tokenizer.tokenize_segmented(text, &self.lookup)
    }

    pub fn probability(&self, text: &str, tokenizer: &Tokenizer) -> f64 {
        self.model.probability(&self.featurizer.featurize(&self.tokens(text, tokenizer)))
    }

    pub fn is_relevant(&self, text: &str, tokenizer: &Tokenizer) -> bool {
        self.probability(text, tokenizer) >= self.threshold
    }

    fn check(&self) -> Result<()> {
        if self.format_version != PIPELINE_FORMAT_VERSION {
            return Err(Error::Data(format!(
                "pipeline format version {} not supported (expected {PIPELINE_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.featurizer.dim() != self.model.dim() {
            return Err(Error::Invariant(format!(
                "featurizer produces {} values but classifier has {} weights",
                self.featurizer.dim(),
                self.model.dim()
            )));
        }
        if !self.model.is_finite() {
            return Err(Error::Invariant("classifier has non-finite parameters".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut p: RelevancePipeline = serde_json::from_str(&raw)?;
        p.check()?;
        p.lookup = p.wordlist.iter().cloned().collect();
        Ok(p)
    }
}

/// Trains one pipeline for `types`; a hybrid model is trained by passing
/// the union of the types' examples. `unlabeled` texts only feed word
/// embeddings; `extra_words` (keywords, place names) join the hashtag
/// segmentation lexicon. The result does not depend on example order.
pub fn train_relevance(
    types: &[DisasterType],
    examples: &[LabeledExample],
    unlabeled: &[String],
    extra_words: &[String],
    tokenizer: &Tokenizer,
    config: &RelevanceConfig,
    seed: u64,
) -> Result<RelevancePipeline> {
    let mut sorted: Vec<&LabeledExample> = examples.iter().collect();
    sorted.sort_by(|a, b| a.text.cmp(&b.text).then(a.label.cmp(&b.label)));
    let labels: Vec<bool> = sorted.iter().map(|e| e.label == Label::Related).collect();
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::Data(format!(
            "relevance training for {types:?} needs both related and not-related examples ({} given)",
            sorted.len()
        )));
    }

    let raw: Vec<Vec<String>> = sorted.iter().map(|e| tokenizer.tokenize(&e.text)).collect();
    let wordlist: BTreeSet<String> = segmentation_wordlist(raw.iter(), extra_words).into_iter().collect();
    let lookup: HashSet<String> = wordlist.iter().cloned().collect();
    let docs: Vec<Vec<String>> = sorted.iter().map(|e| tokenizer.tokenize_segmented(&e.text, &lookup)).collect();

    let featurizer = match config.featurization {
        Featurization::TfidfLsi => {
            let vocab = build_vocab(&docs, config.min_count);
            if vocab.is_empty() {
                return Err(Error::Data(format!("no token occurs {} times in the training examples", config.min_count)));
            }
            let idf = tfidf_fit(&docs, &vocab);
            let weighted: Vec<_> = docs.iter().map(|d| tfidf_transform(&bow(d, &vocab), &idf)).collect();
            let bound = vocab.len().min(docs.len());
            let k = config.lsi_k.unwrap_or(100).min(bound);
            let lsi_cfg = LsiConfig { seed, ..config.lsi };
            let (lsi, report) = lsi_fit_with(&weighted, k, &lsi_cfg)?;
            log::info!("lsi k={k}: {} iterations, converged={}", report.iterations, report.converged);
            Featurizer::TfidfLsi { vocab, idf, lsi }
        }
        Featurization::Word2vecAvg => {
            let mut corpus = docs.clone();
            corpus.extend(unlabeled.iter().map(|t| tokenizer.tokenize_segmented(t, &lookup)));
            let w2v = Word2VecConfig { seed, min_count: config.min_count, ..config.word2vec };
            Featurizer::Word2vecAvg { embeddings: train_word2vec(&corpus, &w2v)? }
        }
    };

    let x: Vec<Vec<f64>> = docs.iter().map(|d| featurizer.featurize(d)).collect();
    let model = train_logreg(&x, &labels, &config.logreg)?;
    let pipeline = RelevancePipeline {
        format_version: PIPELINE_FORMAT_VERSION,
        types: types.iter().copied().collect(),
        featurizer,
        model,
        threshold: config.threshold,
        wordlist,
        lookup,
    };
    pipeline.check()?;
    Ok(pipeline)
}

/// Ids of tweets whose predicted probability reaches the threshold.
pub fn classify_learning(corpus: &Corpus, pipeline: &RelevancePipeline, tokenizer: &Tokenizer) -> BTreeSet<String> {
    corpus
        .tweets()
        .iter()
        .filter(|t| pipeline.is_relevant(&t.text, tokenizer))
        .map(|t| t.tweet_id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Vec<LabeledExample> {
        let rel = ["quake shook the house", "big quake damage", "quake aftershock again", "earthquake damage downtown", "aftershock felt quake"];
        let not = ["lunch with friends", "great lunch today", "friends at the game", "the game today", "coffee with friends"];
        rel.iter()
            .map(|t| LabeledExample::new(*t, Label::Related))
            .chain(not.iter().map(|t| LabeledExample::new(*t, Label::NotRelated)))
            .collect()
    }

    fn small() -> RelevanceConfig {
        RelevanceConfig { logreg: LogRegConfig { learning_rate: 1.0, epochs: 300, ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn save_load_predicts_identically() {
        let tok = Tokenizer::default();
        let p = train_relevance(&[DisasterType::Earthquake], &toy(), &[], &[], &tok, &small(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        p.save(&path).unwrap();
        let q = RelevancePipeline::load(&path).unwrap();
        assert_eq!(p, q);
        for text in ["quake #quakedamage", "lunch", "", "zzz"] {
            assert_eq!(p.probability(text, &tok).to_bits(), q.probability(text, &tok).to_bits());
        }
        assert!(p.probability("quake damage", &tok) > p.probability("lunch with friends", &tok));
    }

    #[test]
    fn example_order_does_not_matter() {
        let tok = Tokenizer::default();
        let mut rev = toy();
        rev.reverse();
        let a = train_relevance(&[DisasterType::Earthquake], &toy(), &[], &[], &tok, &small(), 3).unwrap();
        let b = train_relevance(&[DisasterType::Earthquake], &rev, &[], &[], &tok, &small(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_label_rejected() {
        let tok = Tokenizer::default();
        let only: Vec<_> = toy().into_iter().filter(|e| e.label == Label::Related).collect();
        assert!(train_relevance(&[DisasterType::Flood], &only, &[], &[], &tok, &small(), 1).is_err());
    }

    #[test]
    fn version_mismatch_rejected() {
        let tok = Tokenizer::default();
        let mut p = train_relevance(&[DisasterType::Earthquake], &toy(), &[], &[], &tok, &small(), 3).unwrap();
        p.format_version = 99;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        p.save(&path).unwrap();
        assert!(matches!(RelevancePipeline::load(&path), Err(Error::Data(_))));
    }

    #[test]
    fn empty_corpus_classifies_nothing() {
        let tok = Tokenizer::default();
        let p = train_relevance(&[DisasterType::Earthquake], &toy(), &[], &[], &tok, &small(), 3).unwrap();
        assert!(classify_learning(&Corpus::default(), &p, &tok).is_empty());
    }
}
