use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use triage_core::corpus::Tokenizer;
use triage_core::features::{cosine, train_doc2vec, train_word2vec, Doc2VecConfig, Word2VecConfig};
use triage_core::learner::{
    logreg_loss, train_logreg, train_logreg_traced, train_relevance, Label, LabeledExample, LogRegConfig, LogRegModel,
    RelevanceConfig, RelevancePipeline,
};
use triage_core::regions::DisasterType;

const TOPIC_A: &[&str] = &["river", "levee", "sandbag", "flooded", "rising", "crest"];
const TOPIC_B: &[&str] = &["guitar", "concert", "stage", "encore", "drums", "singer"];

fn topic_docs(seed: u64, n: usize, len: usize) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let topic = if i % 2 == 0 { TOPIC_A } else { TOPIC_B };
            (0..len).map(|_| topic.choose(&mut rng).unwrap().to_string()).collect()
        })
        .collect()
}

fn mean_cos(emb: &triage_core::features::WordEmbeddings, xs: &[&str], ys: &[&str]) -> f64 {
    let mut total = 0.0;
    let mut n = 0.0;
    for x in xs {
        for y in ys {
            if x != y {
                total += emb.cosine(x, y).unwrap();
                n += 1.0;
            }
        }
    }
    total / n
}

#[test]
fn word2vec_groups_cooccurring_words() {
    let docs = topic_docs(3, 200, 8);
    let cfg = Word2VecConfig { dim: 20, window: 3, epochs: 10, subsample: 0.0, min_count: 1, ..Word2VecConfig::default() };
    let emb = train_word2vec(&docs, &cfg).unwrap();
    let within = (mean_cos(&emb, TOPIC_A, TOPIC_A) + mean_cos(&emb, TOPIC_B, TOPIC_B)) / 2.0;
    let across = mean_cos(&emb, TOPIC_A, TOPIC_B);
    assert!(within > across + 0.2, "within {within} across {across}");
}

fn doc2vec_corpus() -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let words: Vec<&str> = TOPIC_A.iter().chain(TOPIC_B).copied().collect();
    let mut docs: Vec<Vec<String>> =
        (0..49).map(|_| (0..rng.gen_range(6..12)).map(|_| words.choose(&mut rng).unwrap().to_string()).collect()).collect();
    docs.push(docs[0].clone());
    docs
}

fn d2v_config() -> Doc2VecConfig {
    Doc2VecConfig { dim: 20, window: 3, epochs: 100, subsample: 0.0, infer_steps: 100, ..Doc2VecConfig::default() }
}

#[test]
fn identical_documents_get_the_closest_vectors() {
    let docs = doc2vec_corpus();
    let emb = train_doc2vec(&docs, &d2v_config()).unwrap();
    let dup = cosine(emb.doc_vector(0), emb.doc_vector(49));
    for j in 1..49 {
        let other = cosine(emb.doc_vector(0), emb.doc_vector(j));
        assert!(dup > other, "cos(dup) {dup} <= cos(0, {j}) {other}");
    }
}

#[test]
fn inferred_vectors_track_trained_ones() {
    let docs = doc2vec_corpus();
    let emb = train_doc2vec(&docs, &d2v_config()).unwrap();
    let sims: Vec<f64> = docs.iter().enumerate().map(|(i, d)| cosine(&emb.infer_vector(d, i as u64), emb.doc_vector(i))).collect();
    assert!(sims.iter().all(|&c| c > 0.7), "{sims:?}");
}

fn blobs(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let pos = i % 2 == 0;
        let c = if pos { 1.5 } else { -1.5 };
        x.push(vec![c + noise.sample(&mut rng), c + noise.sample(&mut rng)]);
        y.push(pos);
    }
    (x, y)
}

#[test]
fn logreg_separates_gaussian_blobs() {
    let (x, y) = blobs(7, 100);
    let model = train_logreg(&x, &y, &LogRegConfig::default()).unwrap();
    let correct = x.iter().zip(&y).filter(|(xi, yi)| (model.probability(xi) >= 0.5) == **yi).count();
    assert!(correct as f64 / 100.0 >= 0.99, "accuracy {correct}/100");
}

#[test]
fn untrained_model_is_indifferent() {
    let m = LogRegModel::zeros(3, 0.0);
    assert_eq!(m.probability(&[5.0, -2.0, 9.0]), 0.5);
}

#[test]
fn loss_never_rises_on_standardized_toy_data() {
    for seed in 0..10 {
        let (x, y) = blobs(seed, 60);
        for lr in [0.01, 0.05, 0.1] {
            let cfg = LogRegConfig { learning_rate: lr, epochs: 150, l2: 1e-3 };
            let (model, losses) = train_logreg_traced(&x, &y, &cfg).unwrap();
            assert_eq!(losses.len(), 151);
            for w in losses.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "seed {seed} lr {lr}: {} -> {}", w[0], w[1]);
            }
            assert!((logreg_loss(&model, &x, &y) - losses[150]).abs() < 1e-12);
        }
    }
}

#[test]
fn single_class_training_is_rejected() {
    let x = vec![vec![1.0], vec![2.0]];
    let err = train_logreg(&x, &[true, true], &LogRegConfig::default()).unwrap_err();
    assert!(err.to_string().contains("both classes"));
}

fn toy_examples() -> Vec<LabeledExample> {
    let related = [
        "earthquake damage downtown",
        "the quake shook our house",
        "aftershock felt in napa",
        "earthquake cracked the road",
        "quake damage to the winery",
    ];
    let unrelated = ["lunch with friends", "great game tonight", "coffee and a good book", "new shoes today", "friends at the game"];
    related
        .iter()
        .map(|t| LabeledExample::new(*t, Label::Related))
        .chain(unrelated.iter().map(|t| LabeledExample::new(*t, Label::NotRelated)))
        .collect()
}

fn small_config() -> RelevanceConfig {
    RelevanceConfig { min_count: 1, ..RelevanceConfig::default() }
}

#[test]
fn pipeline_roundtrip_predicts_identically() {
    let tok = Tokenizer::default();
    let p = train_relevance(&[DisasterType::Earthquake], &toy_examples(), &[], &[], &tok, &small_config(), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    p.save(&path).unwrap();
    let q = RelevancePipeline::load(&path).unwrap();
    assert_eq!(p, q);
    for t in ["earthquake downtown", "lunch and coffee", "#napaquake damage", ""] {
        assert_eq!(p.probability(t, &tok).to_bits(), q.probability(t, &tok).to_bits());
    }
}

#[test]
fn pipeline_ignores_example_order() {
    let tok = Tokenizer::default();
    let ex = toy_examples();
    let mut shuffled = ex.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let a = train_relevance(&[DisasterType::Earthquake], &ex, &[], &[], &tok, &small_config(), 3).unwrap();
    let b = train_relevance(&[DisasterType::Earthquake], &shuffled, &[], &[], &tok, &small_config(), 3).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn higher_threshold_never_enlarges_relevant_set(lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let tok = Tokenizer::default();
        let base = train_relevance(&[DisasterType::Earthquake], &toy_examples(), &[], &[], &tok, &small_config(), 3).unwrap();
        let texts = ["earthquake", "quake damage", "lunch", "friends game", "napa aftershock coffee", "book"];
        let with = |t: f64| {
            let mut p = base.clone();
            p.threshold = t;
            texts.iter().filter(|x| p.is_relevant(x, &tok)).count()
        };
        prop_assert!(with(hi) <= with(lo));
    }
}
