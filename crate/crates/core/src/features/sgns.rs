//! Negative-sampling objective shared by the skip-gram and PV-DM trainers.

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;

use super::Vocabulary;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log σ(x)` without overflow.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// `−Σ log σ(±u·h)`, `+` for positive targets.
pub fn sgns_loss(h: &[f64], outputs: &[&[f64]], positive: &[bool]) -> f64 {
    outputs
        .iter()
        .zip(positive)
        .map(|(u, &pos)| {
            let s = dot(u, h);
            -log_sigmoid(if pos { s } else { -s })
        })
        .sum()
}

/// Gradient of [`sgns_loss`] with respect to `h` (written to `grad_h`) and
/// to each output vector (written to `grad_out[j]`).
pub fn sgns_gradient(h: &[f64], outputs: &[&[f64]], positive: &[bool], grad_h: &mut [f64], grad_out: &mut [Vec<f64>]) {
    grad_h.iter_mut().for_each(|g| *g = 0.0);
    for ((u, &pos), gu) in outputs.iter().zip(positive).zip(grad_out.iter_mut()) {
        // dL/ds = σ(s) − label
        let g = sigmoid(dot(u, h)) - if pos { 1.0 } else { 0.0 };
        for (gh, &ui) in grad_h.iter_mut().zip(u.iter()) {
            *gh += g * ui;
        }
        gu.clear();
        gu.extend(h.iter().map(|&hi| g * hi));
    }
}

/// PV-DM hidden state: mean of the document vector and the context word vectors.
pub fn pvdm_hidden(doc: &[f64], context: &[&[f64]], out: &mut [f64]) {
    out.copy_from_slice(doc);
    for c in context {
        for (o, &x) in out.iter_mut().zip(c.iter()) {
            *o += x;
        }
    }
    let n = (context.len() + 1) as f64;
    out.iter_mut().for_each(|o| *o /= n);
}

pub fn pvdm_loss(doc: &[f64], context: &[&[f64]], outputs: &[&[f64]], positive: &[bool]) -> f64 {
    let mut h = vec![0.0; doc.len()];
    pvdm_hidden(doc, context, &mut h);
    sgns_loss(&h, outputs, positive)
}

/// Gradient of [`pvdm_loss`]. The document vector and every context word
/// receive the same gradient, `∂L/∂h / (n+1)`, returned as `grad_input`.
pub fn pvdm_gradient(
    doc: &[f64],
    context: &[&[f64]],
    outputs: &[&[f64]],
    positive: &[bool],
    grad_input: &mut [f64],
    grad_out: &mut [Vec<f64>],
) {
    let mut h = vec![0.0; doc.len()];
    pvdm_hidden(doc, context, &mut h);
    sgns_gradient(&h, outputs, positive, grad_input, grad_out);
    let n = (context.len() + 1) as f64;
    grad_input.iter_mut().for_each(|g| *g /= n);
}

/// Unigram^0.75 negative sampler plus frequent-word subsampling.
#[derive(Debug, Clone)]
pub(crate) struct Sampler {
    noise: Option<WeightedIndex<f64>>,
    keep_prob: Vec<f64>,
}

impl Sampler {
    pub fn new(vocab: &Vocabulary, subsample: f64) -> Self {
        let weights: Vec<f64> = (0..vocab.len()).map(|i| (vocab.corpus_freq(i) as f64).powf(0.75)).collect();
        let noise = WeightedIndex::new(&weights).ok();
        let total = vocab.total_count() as f64;
        let keep_prob = (0..vocab.len())
            .map(|i| {
                if subsample <= 0.0 {
                    return 1.0;
                }
                let f = vocab.corpus_freq(i) as f64;
                let t = subsample * total;
                (((f / t).sqrt() + 1.0) * t / f).min(1.0)
            })
            .collect();
        Sampler { noise, keep_prob }
    }

    pub fn negative<R: Rng>(&self, rng: &mut R) -> usize {
        self.noise.as_ref().map(|d| d.sample(rng)).unwrap_or(0)
    }

    /// Indices that survive subsampling on this pass.
    pub fn subsample<R: Rng>(&self, doc: &[usize], rng: &mut R) -> Vec<usize> {
        doc.iter()
            .copied()
            .filter(|&w| {
                let p = self.keep_prob[w];
                p >= 1.0 || rng.gen::<f64>() < p
            })
            .collect()
    }

    /// Positive target followed by up to `k` negatives (draws equal to the
    /// positive are skipped).
    pub fn targets<R: Rng>(&self, positive: usize, k: usize, rng: &mut R, out: &mut Vec<(usize, bool)>) {
        out.clear();
        out.push((positive, true));
        for _ in 0..k {
            let n = self.negative(rng);
            if n != positive {
                out.push((n, false));
            }
        }
    }
}

/// Linearly decayed learning rate for progress in `[0, 1]`.
pub(crate) fn decayed_rate(start: f64, floor: f64, progress: f64) -> f64 {
    (start * (1.0 - progress)).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn subsampling_disabled_keeps_everything() {
        let docs = vec![vec!["a".to_string(); 50]];
        let vocab = super::super::build_vocab(&docs, 1);
        let s = Sampler::new(&vocab, 0.0);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        assert_eq!(s.subsample(&[0; 50], &mut rng).len(), 50);
        let s = Sampler::new(&vocab, 1e-4);
        assert!(s.keep_prob[0] < 0.1);
    }
}
