use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn agreement(a: &BTreeSet<String>, b: &BTreeSet<String>) -> BTreeSet<String> {
    a.intersection(b).cloned().collect()
}

/// `100 · agreed / retrieved`, from counts. `None` when nothing was
/// retrieved.
pub fn paper_recall_counts(n_retrieved: usize, n_agreed: usize) -> Option<f64> {
    (n_retrieved > 0).then(|| 100.0 * n_agreed as f64 / n_retrieved as f64)
}

/// Share of `retrieved` that both methods agree on, in percent. Only the
/// part of `agreed` inside `retrieved` counts.
pub fn paper_recall(retrieved: &BTreeSet<String>, agreed: &BTreeSet<String>) -> Option<f64> {
    paper_recall_counts(retrieved.len(), retrieved.intersection(agreed).count())
}

pub fn relevance_ratio(n_relevant: usize, n_total_despammed: usize) -> Option<f64> {
    (n_total_despammed > 0).then(|| 100.0 * n_relevant as f64 / n_total_despammed as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

/// Standard precision and recall as fractions. Ids outside `universe` are
/// ignored.
pub fn precision_recall(predicted: &BTreeSet<String>, truth: &BTreeSet<String>, universe: &BTreeSet<String>) -> PrecisionRecall {
    let predicted: BTreeSet<&String> = predicted.intersection(universe).collect();
    let truth: BTreeSet<&String> = truth.intersection(universe).collect();
    let hits = predicted.intersection(&truth).count() as f64;
    PrecisionRecall {
        precision: (!predicted.is_empty()).then(|| hits / predicted.len() as f64),
        recall: (!truth.is_empty()).then(|| hits / truth.len() as f64),
    }
}

/// Seeded shuffle, then the first `⌊ratio·n⌋` items train and the rest test.
pub fn split_labeled<T: Clone>(examples: &[T], ratio: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    assert!(ratio > 0.0 && ratio < 1.0, "split ratio must lie in (0, 1)");
    let mut shuffled = examples.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (ratio * examples.len() as f64).floor() as usize;
    let test = shuffled.split_off(cut);
    (shuffled, test)
}
