//! Distributed-memory paragraph vectors (PV-DM) with negative sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::Matrix;
use super::sgns::{decayed_rate, pvdm_gradient, Sampler};
use super::word2vec::random_rows;
use super::{build_vocab, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Doc2VecConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub subsample: f64,
    pub epochs: usize,
    pub min_count: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub seed: u64,
    /// Passes over an unseen document in [`DocEmbeddings::infer_vector`].
    pub infer_steps: usize,
    pub infer_learning_rate: f64,
}

impl Default for Doc2VecConfig {
    fn default() -> Self {
        Doc2VecConfig {
            dim: 100,
            window: 10,
            negatives: 5,
            subsample: 1e-4,
            epochs: 20,
            min_count: 1,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            seed: 1,
            infer_steps: 20,
            infer_learning_rate: 0.025,
        }
    }
}

/// Trained document vectors plus the frozen word and output matrices used
/// for inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEmbeddings {
    config: Doc2VecConfig,
    vocab: Vocabulary,
    word_vectors: Matrix,
    output_vectors: Matrix,
    doc_vectors: Matrix,
}

struct Scratch {
    targets: Vec<(usize, bool)>,
    rows: Vec<Vec<f64>>,
    context_rows: Vec<Vec<f64>>,
    grad_input: Vec<f64>,
    grad_out: Vec<Vec<f64>>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch { targets: Vec::new(), rows: Vec::new(), context_rows: Vec::new(), grad_input: vec![0.0; dim], grad_out: Vec::new() }
    }
}

/// Parameters touched by one PV-DM pass. Words and outputs are `None`
/// when frozen.
struct Params<'a> {
    doc: &'a mut [f64],
    words: Option<&'a mut Matrix>,
    frozen_words: &'a Matrix,
    outputs: Option<&'a mut Matrix>,
    frozen_outputs: &'a Matrix,
}

#[allow(clippy::too_many_arguments)]
fn pvdm_pass(
    doc: &[usize],
    params: &mut Params<'_>,
    sampler: &Sampler,
    window: usize,
    negatives: usize,
    lr: f64,
    rng: &mut ChaCha8Rng,
    scratch: &mut Scratch,
) {
    let kept = sampler.subsample(doc, rng);
    for (pos, &center) in kept.iter().enumerate() {
        let reduce = if window > 0 { rng.gen_range(0..window) } else { 0 };
        let span = window - reduce;
        let lo = pos.saturating_sub(span);
        let hi = (pos + span).min(kept.len() - 1);
        let context: Vec<usize> = (lo..=hi).filter(|&c| c != pos).map(|c| kept[c]).collect();

        sampler.targets(center, negatives, rng, &mut scratch.targets);
        let words: &Matrix = params.words.as_deref().unwrap_or(params.frozen_words);
        let outputs: &Matrix = params.outputs.as_deref().unwrap_or(params.frozen_outputs);
        scratch.context_rows.clear();
        scratch.context_rows.extend(context.iter().map(|&w| words.row(w).to_vec()));
        scratch.rows.clear();
        scratch.rows.extend(scratch.targets.iter().map(|&(w, _)| outputs.row(w).to_vec()));
        scratch.grad_out.resize(scratch.targets.len(), Vec::new());
        let ctx: Vec<&[f64]> = scratch.context_rows.iter().map(Vec::as_slice).collect();
        let outs: Vec<&[f64]> = scratch.rows.iter().map(Vec::as_slice).collect();
        let labels: Vec<bool> = scratch.targets.iter().map(|&(_, l)| l).collect();
        let n_targets = scratch.targets.len();
        pvdm_gradient(params.doc, &ctx, &outs, &labels, &mut scratch.grad_input, &mut scratch.grad_out[..n_targets]);

        if let Some(out_m) = params.outputs.as_deref_mut() {
            for (&(w, _), g) in scratch.targets.iter().zip(&scratch.grad_out) {
                for (o, gi) in out_m.row_mut(w).iter_mut().zip(g) {
                    *o -= lr * gi;
                }
            }
        }
        if let Some(word_m) = params.words.as_deref_mut() {
            for &w in &context {
                for (x, gi) in word_m.row_mut(w).iter_mut().zip(&scratch.grad_input) {
                    *x -= lr * gi;
                }
            }
        }
        for (x, gi) in params.doc.iter_mut().zip(&scratch.grad_input) {
            *x -= lr * gi;
        }
    }
}

/// Trains PV-DM over `docs`; document `i` gets vector `i`.
pub fn train_doc2vec(docs: &[Vec<String>], config: &Doc2VecConfig) -> Result<DocEmbeddings> {
    let vocab = build_vocab(docs, config.min_count);
    if vocab.is_empty() {
        return Err(Error::Data("doc2vec: empty vocabulary".into()));
    }
    let dim = config.dim.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut word_vectors = random_rows(vocab.len(), dim, &mut rng);
    let mut doc_vectors = random_rows(docs.len(), dim, &mut rng);
    let mut output_vectors = Matrix::zeros(vocab.len(), dim);
    let sampler = Sampler::new(&vocab, config.subsample);
    let encoded: Vec<Vec<usize>> = docs.iter().map(|d| vocab.encode(d)).collect();
    let total_words = (encoded.iter().map(Vec::len).sum::<usize>() * config.epochs).max(1);
    let empty = Matrix::zeros(0, 0);
    let mut scratch = Scratch::new(dim);
    let mut processed = 0usize;
    for _epoch in 0..config.epochs {
        for (d, doc) in encoded.iter().enumerate() {
            let lr = decayed_rate(config.learning_rate, config.min_learning_rate, processed as f64 / total_words as f64);
            processed += doc.len();
            let mut params = Params {
                doc: doc_vectors.row_mut(d),
                words: Some(&mut word_vectors),
                frozen_words: &empty,
                outputs: Some(&mut output_vectors),
                frozen_outputs: &empty,
            };
            pvdm_pass(doc, &mut params, &sampler, config.window, config.negatives, lr, &mut rng, &mut scratch);
        }
    }
    Ok(DocEmbeddings { config: *config, vocab, word_vectors, output_vectors, doc_vectors })
}

impl DocEmbeddings {
    pub fn dim(&self) -> usize {
        self.doc_vectors.cols()
    }

    pub fn len(&self) -> usize {
        self.doc_vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn config(&self) -> &Doc2VecConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Trained vector of training document `i`.
    pub fn doc_vector(&self, i: usize) -> &[f64] {
        self.doc_vectors.row(i)
    }

    /// Vector for an unseen document: starts at zero and runs
    /// `infer_steps` passes with word and output matrices frozen. A
    /// document with no known words stays at zero.
    pub fn infer_vector(&self, doc: &[String], seed: u64) -> Vec<f64> {
        let dim = self.dim();
        let mut vector = vec![0.0; dim];
        let encoded = self.vocab.encode(doc);
        if encoded.is_empty() {
            return vector;
        }
        let sampler = Sampler::new(&self.vocab, self.config.subsample);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scratch = Scratch::new(dim);
        let steps = self.config.infer_steps;
        for step in 0..steps {
            let lr = decayed_rate(self.config.infer_learning_rate, self.config.min_learning_rate, step as f64 / steps as f64);
            let mut params = Params {
                doc: &mut vector,
                words: None,
                frozen_words: &self.word_vectors,
                outputs: None,
                frozen_outputs: &self.output_vectors,
            };
            pvdm_pass(&encoded, &mut params, &sampler, self.config.window, self.config.negatives, lr, &mut rng, &mut scratch);
        }
        vector
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn small() -> Doc2VecConfig {
        Doc2VecConfig { dim: 8, epochs: 5, subsample: 0.0, ..Default::default() }
    }

    #[test]
    fn trains_one_vector_per_doc() {
        let docs = vec![toks("a b c"), toks("c d"), toks("e")];
        let m = train_doc2vec(&docs, &small()).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.dim(), 8);
        assert!((0..3).all(|i| m.doc_vector(i).iter().all(|x| x.is_finite())));
    }

    #[test]
    fn empty_document_infers_zero() {
        let m = train_doc2vec(&[toks("a b c")], &small()).unwrap();
        assert_eq!(m.infer_vector(&[], 3), vec![0.0; 8]);
        assert_eq!(m.infer_vector(&toks("zz qq"), 3), vec![0.0; 8]);
        assert!(m.infer_vector(&toks("a b"), 3).iter().any(|&x| x != 0.0));
    }

    #[test]
    fn deterministic() {
        let docs = vec![toks("a b c a"), toks("c d b")];
        let a = train_doc2vec(&docs, &small()).unwrap();
        let b = train_doc2vec(&docs, &small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.infer_vector(&toks("a d"), 9), b.infer_vector(&toks("a d"), 9));
    }
}
