//! Skip-gram word embeddings with negative sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::Matrix;
use super::sgns::{decayed_rate, sgns_gradient, Sampler};
use super::{build_vocab, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Word2VecConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub subsample: f64,
    pub epochs: usize,
    pub min_count: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub seed: u64,
}

impl Default for Word2VecConfig {
    fn default() -> Self {
        Word2VecConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            subsample: 1e-4,
            epochs: 10,
            min_count: 2,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordEmbeddings {
    vocab: Vocabulary,
    vectors: Matrix,
}

impl WordEmbeddings {
    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.index_of(token).map(|i| self.vectors.row(i))
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        Some(cosine(self.vector(a)?, self.vector(b)?))
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub(crate) fn random_rows(rows: usize, dim: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(rows, dim);
    for i in 0..rows {
        for x in m.row_mut(i) {
            *x = (rng.gen::<f64>() - 0.5) / dim as f64;
        }
    }
    m
}

/// Trains skip-gram vectors. Fails if no token reaches `min_count`.
pub fn train_word2vec(docs: &[Vec<String>], config: &Word2VecConfig) -> Result<WordEmbeddings> {
    let vocab = build_vocab(docs, config.min_count);
    if vocab.is_empty() {
        return Err(Error::Data("word2vec: empty vocabulary".into()));
    }
    let dim = config.dim.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input = random_rows(vocab.len(), dim, &mut rng);
    let mut output = Matrix::zeros(vocab.len(), dim);
    let sampler = Sampler::new(&vocab, config.subsample);
    let encoded: Vec<Vec<usize>> = docs.iter().map(|d| vocab.encode(d)).collect();
    let total_words = (encoded.iter().map(Vec::len).sum::<usize>() * config.epochs).max(1);

    let mut targets = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut grad_h = vec![0.0; dim];
    let mut grad_out: Vec<Vec<f64>> = Vec::new();
    let mut processed = 0usize;
    for _epoch in 0..config.epochs {
        for doc in &encoded {
            let lr = decayed_rate(config.learning_rate, config.min_learning_rate, processed as f64 / total_words as f64);
            processed += doc.len();
            let kept = sampler.subsample(doc, &mut rng);
            for (pos, &center) in kept.iter().enumerate() {
                let reduce = if config.window > 0 { rng.gen_range(0..config.window) } else { 0 };
                let span = config.window - reduce;
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(kept.len().saturating_sub(1));
                for (c, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if c == pos {
                        continue;
                    }
                    sampler.targets(context, config.negatives, &mut rng, &mut targets);
                    rows.clear();
                    rows.extend(targets.iter().map(|&(w, _)| output.row(w).to_vec()));
                    grad_out.resize(targets.len(), Vec::new());
                    let outs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
                    let labels: Vec<bool> = targets.iter().map(|&(_, l)| l).collect();
                    sgns_gradient(input.row(center), &outs, &labels, &mut grad_h, &mut grad_out[..targets.len()]);
                    for (&(w, _), g) in targets.iter().zip(&grad_out) {
                        for (o, gi) in output.row_mut(w).iter_mut().zip(g) {
                            *o -= lr * gi;
                        }
                    }
                    for (x, gi) in input.row_mut(center).iter_mut().zip(&grad_h) {
                        *x -= lr * gi;
                    }
                }
            }
        }
    }
    Ok(WordEmbeddings { vocab, vectors: input })
}

/// Mean of the in-vocabulary word vectors of `doc`; zeros if none.
pub fn doc_vector_avg(doc: &[String], emb: &WordEmbeddings) -> Vec<f64> {
    let mut sum = vec![0.0; emb.dim()];
    let mut n = 0usize;
    for token in doc {
        if let Some(v) = emb.vector(token) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            n += 1;
        }
    }
    if n > 0 {
        sum.iter_mut().for_each(|s| *s /= n as f64);
    }
    sum
}
