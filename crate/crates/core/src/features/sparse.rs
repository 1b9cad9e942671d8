use serde::{Deserialize, Serialize};

use super::Vocabulary;

/// Sorted `(index, weight)` pairs over a fixed dimension; zeros are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    /// Sorts, merges duplicate indices by summing, and drops zeros.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            assert!(i < dim, "index {i} out of dimension {dim}");
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += w,
                _ => entries.push((i, w)),
            }
        }
        entries.retain(|&(_, w)| w != 0.0);
        SparseVector { dim, entries }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let entries = dense.iter().enumerate().filter(|(_, &w)| w != 0.0).map(|(i, &w)| (i, w)).collect();
        SparseVector { dim: dense.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, w) in &self.entries {
            out[i] = w;
        }
        out
    }

    pub(crate) fn map_weights(&self, mut f: impl FnMut(usize, f64) -> f64) -> SparseVector {
        let entries = self
            .entries
            .iter()
            .map(|&(i, w)| (i, f(i, w)))
            .filter(|&(_, w)| w != 0.0)
            .collect();
        SparseVector { dim: self.dim, entries }
    }
}

/// Raw term counts of in-vocabulary tokens.
pub fn bow(doc: &[String], vocab: &Vocabulary) -> SparseVector {
    let pairs = vocab.encode(doc).into_iter().map(|i| (i, 1.0)).collect();
    SparseVector::from_pairs(vocab.len(), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::build_vocab;

    fn s(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn bow_counts() {
        let vocab = build_vocab(&[s(&["a", "b"])], 1);
        assert_eq!(bow(&s(&["a", "b", "a"]), &vocab).entries(), &[(0, 2.0), (1, 1.0)]);
        assert!(bow(&s(&["z"]), &vocab).is_empty());
        assert!(bow(&[], &vocab).is_empty());
        assert_eq!(bow(&[], &vocab).dim(), 2);
    }

    #[test]
    fn from_pairs_normalizes() {
        let v = SparseVector::from_pairs(5, vec![(3, 1.0), (1, 2.0), (3, -1.0), (4, 0.5)]);
        assert_eq!(v.entries(), &[(1, 2.0), (4, 0.5)]);
        assert_eq!(v.get(4), 0.5);
        assert_eq!(v.get(3), 0.0);
        assert_eq!(SparseVector::from_dense(&v.to_dense()), v);
    }
}
