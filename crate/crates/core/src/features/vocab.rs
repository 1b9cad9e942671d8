use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Token ↔ dense index, with document and corpus frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabFile", into = "VocabFile")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    corpus_freq: Vec<usize>,
    min_count: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    min_count: usize,
    tokens: Vec<String>,
    doc_freq: Vec<usize>,
    corpus_freq: Vec<usize>,
}

impl From<VocabFile> for Vocabulary {
    fn from(f: VocabFile) -> Self {
        let index = f.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { tokens: f.tokens, index, doc_freq: f.doc_freq, corpus_freq: f.corpus_freq, min_count: f.min_count }
    }
}

impl From<Vocabulary> for VocabFile {
    fn from(v: Vocabulary) -> Self {
        VocabFile { min_count: v.min_count, tokens: v.tokens, doc_freq: v.doc_freq, corpus_freq: v.corpus_freq }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn doc_freq(&self, index: usize) -> usize {
        self.doc_freq[index]
    }

    pub fn corpus_freq(&self, index: usize) -> usize {
        self.corpus_freq[index]
    }

    /// Sum of corpus frequencies of retained tokens.
    pub fn total_count(&self) -> usize {
        self.corpus_freq.iter().sum()
    }

    /// In-vocabulary indices of `doc`, in order.
    pub fn encode(&self, doc: &[String]) -> Vec<usize> {
        doc.iter().filter_map(|t| self.index_of(t)).collect()
    }
}

/// Keeps tokens seen at least `min_count` times, indexed by first appearance.
pub fn build_vocab<D: AsRef<[String]>>(docs: &[D], min_count: usize) -> Vocabulary {
    let min_count = min_count.max(1);
    let mut order: Vec<&str> = Vec::new();
    let mut stats: HashMap<&str, (usize, usize, usize)> = HashMap::new(); // (cf, df, last doc)
    for (d, doc) in docs.iter().enumerate() {
        for token in doc.as_ref() {
            let entry = stats.entry(token.as_str()).or_insert_with(|| {
                order.push(token.as_str());
                (0, 0, usize::MAX)
            });
            entry.0 += 1;
            if entry.2 != d {
                entry.1 += 1;
                entry.2 = d;
            }
        }
    }
    let mut tokens = Vec::new();
    let mut doc_freq = Vec::new();
    let mut corpus_freq = Vec::new();
    for token in order {
        let (cf, df, _) = stats[token];
        if cf >= min_count {
            tokens.push(token.to_string());
            doc_freq.push(df);
            corpus_freq.push(cf);
        }
    }
    let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Vocabulary { tokens, index, doc_freq, corpus_freq, min_count }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&[&str]]) -> Vec<Vec<String>> {
        raw.iter().map(|d| d.iter().map(|s| s.to_string()).collect()).collect()
    }

    #[test]
    fn min_count_filters() {
        let d = docs(&[&["a", "b", "a"], &["b", "c"]]);
        let v = build_vocab(&d, 2);
        assert_eq!(v.tokens(), &["a".to_string(), "b".to_string()]);
        assert_eq!((v.corpus_freq(0), v.doc_freq(0)), (2, 1));
        assert_eq!((v.corpus_freq(1), v.doc_freq(1)), (2, 2));
        let v = build_vocab(&d, 1);
        assert_eq!(v.len(), 3);
        assert_eq!(v.index_of("c"), Some(2));
        assert!(build_vocab::<Vec<String>>(&[], 2).is_empty());
    }

    #[test]
    fn serde_rebuilds_index() {
        let v = build_vocab(&docs(&[&["x", "y", "x"]]), 1);
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.index_of("y"), Some(1));
    }
}
