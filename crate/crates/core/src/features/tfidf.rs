use serde::{Deserialize, Serialize};

use super::{SparseVector, Vocabulary};

/// Smoothed inverse document frequencies, `ln((1+N)/(1+df)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfWeights {
    idf: Vec<f64>,
    n_docs: usize,
}

impl IdfWeights {
    pub fn idf(&self, index: usize) -> f64 {
        self.idf[index]
    }

    pub fn values(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }
}

/// Document frequencies are counted over `docs`, not taken from the vocabulary.
pub fn tfidf_fit<D: AsRef<[String]>>(docs: &[D], vocab: &Vocabulary) -> IdfWeights {
    let mut df = vec![0usize; vocab.len()];
    let mut seen = vec![usize::MAX; vocab.len()];
    for (d, doc) in docs.iter().enumerate() {
        for i in vocab.encode(doc.as_ref()) {
            if seen[i] != d {
                seen[i] = d;
                df[i] += 1;
            }
        }
    }
    let n = docs.len() as f64;
    let idf = df.iter().map(|&f| ((1.0 + n) / (1.0 + f as f64)).ln() + 1.0).collect();
    IdfWeights { idf, n_docs: docs.len() }
}

/// Scales counts by idf and L2-normalizes; a zero vector stays zero.
pub fn tfidf_transform(v: &SparseVector, idf: &IdfWeights) -> SparseVector {
    let weighted = v.map_weights(|i, w| w * idf.idf(i));
    let norm = weighted.norm();
    if norm == 0.0 {
        return weighted;
    }
    weighted.map_weights(|_, w| w / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{bow, build_vocab};

    fn docs(raw: &[&str]) -> Vec<Vec<String>> {
        raw.iter().map(|d| d.split_whitespace().map(str::to_string).collect()).collect()
    }

    #[test]
    fn hand_computed_three_docs() {
        let d = docs(&["quake quake hit", "flood hit", "quake flood"]);
        let vocab = build_vocab(&d, 1);
        let idf = tfidf_fit(&d, &vocab);
        let q = vocab.index_of("quake").unwrap();
        let h = vocab.index_of("hit").unwrap();
        assert!((idf.idf(q) - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-15);
        assert!((idf.idf(q) - 1.2877).abs() < 1e-4);
        let raw = bow(&d[0], &vocab).map_weights(|i, w| w * idf.idf(i));
        assert!((raw.get(q) - 2.5754).abs() < 1e-4);
        assert!((raw.get(h) - 1.2877).abs() < 1e-4);
        let v = tfidf_transform(&bow(&d[0], &vocab), &idf);
        assert!((v.get(q) - 0.8944).abs() < 1e-4);
        assert!((v.get(h) - 0.4472).abs() < 1e-4);
    }

    #[test]
    fn single_doc_idf_is_one() {
        let d = docs(&["a b c"]);
        let vocab = build_vocab(&d, 1);
        assert!(tfidf_fit(&d, &vocab).values().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn zero_vector_passes_through() {
        let d = docs(&["a b"]);
        let vocab = build_vocab(&d, 1);
        let idf = tfidf_fit(&d, &vocab);
        let z = tfidf_transform(&SparseVector::zeros(2), &idf);
        assert!(z.is_empty());
    }
}
