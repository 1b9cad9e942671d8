//! Deterministic synthetic disaster world: counties, a manifest, a tweet
//! corpus with planted relevant/irrelevant and positive/negative
//! structure, labeled training files and a scripted review answer key.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tweet};
use crate::error::{Error, Result};
use crate::learner::{save_training_file, Label, LabeledExample, Source, TrainingFile};
use crate::regions::{CountyGeometry, DisasterManifest, DisasterType, Polygon};
use crate::sentiment::{save_sentiment_file, Polarity, SentimentExample};

const KEYWORDS: &[&str] = &["quake", "aftershock", "tremor", "foreshock"];
const CONVENTIONAL_TAGS: &[&str] = &["earthquake", "valleyearthquake", "valleyquake2024"];
/// User-coined hashtags that contain a keyword but are unknown to the
/// conventional baseline.
pub const COINED_TAGS: &[&str] = &["3amquake", "valleyquake", "quakerelief", "aftershockwatch", "tremortuesday", "quakeprep"];
/// Keyword-bearing hashtags that have nothing to do with the disaster.
pub const DECOY_TAGS: &[&str] = &["quakerstate", "quakeroats"];
const DISASTER_WORDS: &[&str] = &[
    "shaking", "damage", "rubble", "collapsed", "cracked", "shelves", "fell", "power", "outage", "building", "sirens",
    "emergency", "shelter", "evacuate", "injured", "chimney", "glass", "broken", "rescue", "crews", "road", "buckled",
    "gas", "leak", "ground", "rolling", "jolt", "debris", "cleanup", "wall",
];
const EVERYDAY_WORDS: &[&str] = &[
    "lunch", "coffee", "game", "friends", "weekend", "movie", "traffic", "work", "music", "beach", "dinner", "pizza",
    "gym", "class", "sunset", "concert", "shopping", "dog", "park", "birthday", "tacos", "brunch", "playlist", "hiking",
    "netflix", "office", "garden", "baseball", "bakery", "road", "trip", "team",
];
const FILLER: &[&str] = &["the", "a", "so", "just", "this", "today", "and", "my", "at", "in", "we", "all", "with", "now", "still"];
pub const POSITIVE_WORDS: &[&str] = &["great", "love", "awesome", "happy", "wonderful", "amazing", "thankful", "best"];
pub const NEGATIVE_WORDS: &[&str] = &["awful", "hate", "terrible", "sad", "worst", "horrible", "angry", "scary"];
const SPAM_LINES: &[&str] = &["deals at the mall", "buy now limited offer", "free shipping today", "click the link for prizes"];

/// How a tweet was planted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Relevant; a conventional hashtag or a standalone keyword.
    Conventional,
    /// Relevant; the only disaster term is a user-coined keyword hashtag.
    Coined,
    /// Relevant; no keyword or keyword hashtag at all.
    Semantic,
    Irrelevant,
    /// Irrelevant; carries a keyword-bearing decoy hashtag.
    Decoy,
    Spam,
}

impl Kind {
    pub fn is_relevant(self) -> bool {
        matches!(self, Kind::Conventional | Kind::Coined | Kind::Semantic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub users: usize,
    pub tweets: usize,
    pub spammers: usize,
    pub spam_per_day: usize,
    /// Probability that a tweet in the affected / unaffected / outside
    /// counties is relevant.
    pub relevant_rate: [f64; 3],
    /// Shares of conventional, coined and semantic among relevant tweets.
    pub relevant_mix: [f64; 3],
    pub decoy_rate: f64,
    pub labeled_examples: usize,
    pub sentiment_train: usize,
    pub sentiment_test: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 2024,
            users: 360,
            tweets: 5000,
            spammers: 4,
            spam_per_day: 24,
            relevant_rate: [0.35, 0.08, 0.05],
            relevant_mix: [0.55, 0.30, 0.15],
            decoy_rate: 0.01,
            labeled_examples: 600,
            sentiment_train: 200,
            sentiment_test: 200,
        }
    }
}

/// Everything the pipeline needs, plus the planted truth.
#[derive(Debug, Clone)]
pub struct SynthWorld {
    pub corpus: Corpus,
    pub geometry: CountyGeometry,
    pub manifest: DisasterManifest,
    pub relevance_crowdflower: Vec<LabeledExample>,
    pub relevance_crisislex: Vec<LabeledExample>,
    pub sentiment_train: Vec<SentimentExample>,
    pub sentiment_test: Vec<SentimentExample>,
    /// Hashtags a careful reviewer would accept.
    pub answer_key: BTreeSet<String>,
    pub kinds: BTreeMap<String, Kind>,
}

impl SynthWorld {
    pub fn ids_of(&self, pred: impl Fn(Kind) -> bool) -> BTreeSet<String> {
        self.kinds.iter().filter(|(_, &k)| pred(k)).map(|(id, _)| id.clone()).collect()
    }
}

pub const STATE: &str = "90";
pub const AFFECTED: [&str; 2] = ["90005", "90006"];
pub const OUTSIDE: &str = "91001";

fn cell(lon0: f64, lat0: f64) -> Polygon {
    Polygon::simple(vec![(lon0, lat0), (lon0 + 1.0, lat0), (lon0 + 1.0, lat0 + 1.0), (lon0, lat0 + 1.0)])
        .expect("unit square")
}

/// 3×3 grid of one-degree counties `90001..90009` plus one county
/// `91001` of a neighbouring state.
pub fn grid_geometry() -> (CountyGeometry, BTreeMap<String, (f64, f64)>) {
    let mut geom = CountyGeometry::default();
    let mut origin = BTreeMap::new();
    for row in 0..3 {
        for col in 0..3 {
            let fips = format!("{STATE}{:03}", row * 3 + col + 1);
            let (lon0, lat0) = (-120.0 + col as f64, 36.0 + row as f64);
            geom.insert(fips.clone(), vec![cell(lon0, lat0)], Some(format!("County {}", row * 3 + col + 1)));
            origin.insert(fips, (lon0, lat0));
        }
    }
    geom.insert(OUTSIDE, vec![cell(-117.0, 36.0)], Some("Border County".into()));
    origin.insert(OUTSIDE.to_string(), (-117.0, 36.0));
    (geom, origin)
}

pub fn manifest() -> DisasterManifest {
    DisasterManifest {
        disaster_id: "valley_earthquake".into(),
        fema_code: "9999".into(),
        types: [DisasterType::Earthquake].into_iter().collect(),
        start_date: NaiveDate::from_ymd_opt(2024, 3, 10).expect("date"),
        duration_days: 14,
        affected_fips: AFFECTED.iter().map(|s| s.to_string()).collect(),
        vicinity_fips: BTreeSet::new(),
        keyword_overrides: None,
        area_name: Some("valley".into()),
        official_name: Some("valleyquake2024".into()),
    }
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("nonempty word list")
}

fn words<R: Rng>(rng: &mut R, from: &[&str], lo: usize, hi: usize) -> Vec<String> {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| pick(rng, from).to_string()).collect()
}

fn sentence<R: Rng>(rng: &mut R, topical: &[&str], polarity: Option<Polarity>) -> Vec<String> {
    let mut w = words(rng, topical, 2, 4);
    w.extend(words(rng, FILLER, 1, 3));
    if let Some(p) = polarity {
        let list = if p == Polarity::Positive { POSITIVE_WORDS } else { NEGATIVE_WORDS };
        w.push(pick(rng, list).to_string());
    }
    w.shuffle(rng);
    w
}

/// Text for a planted kind.
pub fn text_for<R: Rng>(rng: &mut R, kind: Kind, polarity: Option<Polarity>) -> String {
    let mut w = match kind {
        Kind::Conventional | Kind::Coined | Kind::Semantic => sentence(rng, DISASTER_WORDS, polarity),
        Kind::Irrelevant | Kind::Decoy => sentence(rng, EVERYDAY_WORDS, polarity),
        Kind::Spam => return format!("{} #sale", pick(rng, SPAM_LINES)),
    };
    match kind {
        Kind::Conventional => {
            if rng.gen_bool(0.5) {
                let at = rng.gen_range(0..=w.len());
                w.insert(at, pick(rng, KEYWORDS).to_string());
            }
            if w.iter().all(|t| !KEYWORDS.contains(&t.as_str())) || rng.gen_bool(0.5) {
                w.push(format!("#{}", pick(rng, CONVENTIONAL_TAGS)));
            }
        }
        Kind::Coined => w.push(format!("#{}", pick(rng, COINED_TAGS))),
        Kind::Decoy => w.push(format!("#{}", pick(rng, DECOY_TAGS))),
        _ => {}
    }
    let mut text = w.join(" ");
    if rng.gen_bool(0.2) {
        text.push('!');
    }
    text
}

fn relevant_kind<R: Rng>(rng: &mut R, mix: [f64; 3]) -> Kind {
    let x: f64 = rng.gen::<f64>() * (mix[0] + mix[1] + mix[2]);
    if x < mix[0] {
        Kind::Conventional
    } else if x < mix[0] + mix[1] {
        Kind::Coined
    } else {
        Kind::Semantic
    }
}

fn polarity_for<R: Rng>(rng: &mut R, kind: Kind) -> Option<Polarity> {
    if kind.is_relevant() {
        Some(if rng.gen_bool(0.7) { Polarity::Negative } else { Polarity::Positive })
    } else if rng.gen_bool(0.6) {
        Some(if rng.gen_bool(0.5) { Polarity::Negative } else { Polarity::Positive })
    } else {
        None
    }
}

fn place<R: Rng>(rng: &mut R, tweet: Tweet, fips: &str, origin: &BTreeMap<String, (f64, f64)>) -> Tweet {
    if rng.gen_bool(0.1) {
        return tweet.with_fips(fips);
    }
    let (lon0, lat0) = origin[fips];
    tweet.with_location(lat0 + rng.gen_range(0.05..0.95), lon0 + rng.gen_range(0.05..0.95))
}

/// Texts are labeled related iff the kind is relevant. The crowdflower
/// file also carries low-confidence and undecided rows.
fn labeled<R: Rng>(rng: &mut R, n: usize, mix: [f64; 3]) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let mut crowdflower = Vec::new();
    let mut crisislex = Vec::new();
    for i in 0..n {
        let kind = if i % 2 == 0 {
            relevant_kind(rng, mix)
        } else if rng.gen_bool(0.05) {
            Kind::Decoy
        } else {
            Kind::Irrelevant
        };
        let polarity = polarity_for(rng, kind);
        let label = if kind.is_relevant() { Label::Related } else { Label::NotRelated };
        let text = text_for(rng, kind, polarity);
        if i % 3 == 0 {
            crisislex.push(LabeledExample { text, label, confidence: 1.0, source: Source::CrisislexStyle });
        } else {
            let confidence = if rng.gen_bool(0.1) { 0.67 } else { 1.0 };
            crowdflower.push(LabeledExample { text, label, confidence, source: Source::CrowdflowerStyle });
        }
    }
    (crowdflower, crisislex)
}

/// Balanced polarity examples whose only signal is one or two marker words.
pub fn sentiment_examples(seed: u64, n: usize) -> Vec<SentimentExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topical: Vec<&str> = DISASTER_WORDS.iter().chain(EVERYDAY_WORDS).copied().collect();
    (0..n)
        .map(|i| {
            let polarity = if i % 2 == 0 { Polarity::Positive } else { Polarity::Negative };
            let markers = if polarity == Polarity::Positive { POSITIVE_WORDS } else { NEGATIVE_WORDS };
            let mut w = words(&mut rng, &topical, 3, 6);
            w.extend(words(&mut rng, FILLER, 1, 3));
            w.extend(words(&mut rng, markers, 1, 2));
            w.shuffle(&mut rng);
            SentimentExample::new(w.join(" "), polarity)
        })
        .collect()
}

pub fn generate(cfg: &SynthConfig) -> SynthWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (geometry, origin) = grid_geometry();
    let manifest = manifest();
    let (start, end) = manifest.window();
    let span = (end - start).num_seconds();

    let counties: Vec<&String> = origin.keys().collect();
    let homes: Vec<String> = (0..cfg.users)
        .map(|_| {
            let x: f64 = rng.gen();
            if x < 0.4 {
                pick(&mut rng, &AFFECTED).to_string()
            } else if x < 0.9 {
                let others: Vec<&str> = counties.iter().map(|s| s.as_str()).filter(|f| !AFFECTED.contains(f) && *f != OUTSIDE).collect();
                pick(&mut rng, &others).to_string()
            } else {
                OUTSIDE.to_string()
            }
        })
        .collect();

    let mut tweets = Vec::with_capacity(cfg.tweets);
    let mut kinds = BTreeMap::new();
    let regular = cfg.tweets.saturating_sub(cfg.spammers * cfg.spam_per_day);
    for i in 0..regular {
        let u = rng.gen_range(0..cfg.users.max(1));
        let home = &homes[u];
        let zone = if AFFECTED.contains(&home.as_str()) {
            0
        } else if home == OUTSIDE {
            2
        } else {
            1
        };
        let kind = if rng.gen_bool(cfg.relevant_rate[zone]) {
            relevant_kind(&mut rng, cfg.relevant_mix)
        } else if rng.gen_bool(cfg.decoy_rate) {
            Kind::Decoy
        } else {
            Kind::Irrelevant
        };
        // relevant traffic is front-loaded; 3% of everything falls outside the window
        let offset = if rng.gen_bool(0.03) {
            -rng.gen_range(1..86_400)
        } else if kind.is_relevant() && rng.gen_bool(0.5) {
            rng.gen_range(0..2 * 86_400)
        } else {
            rng.gen_range(0..span)
        };
        let ts = start + Duration::seconds(offset);
        let polarity = polarity_for(&mut rng, kind);
        let id = format!("t{i:06}");
        let tweet = Tweet::new(&id, format!("u{u:04}"), ts, text_for(&mut rng, kind, polarity));
        let tweet = if rng.gen_bool(0.05) { Tweet { is_retweet: true, ..tweet } } else { tweet };
        tweets.push(place(&mut rng, tweet, home, &origin));
        kinds.insert(id, kind);
    }
    for s in 0..cfg.spammers {
        let day = rng.gen_range(0..i64::from(manifest.duration_days));
        let home = if s % 2 == 0 { AFFECTED[s / 2 % 2] } else { "90001" };
        for j in 0..cfg.spam_per_day {
            let ts = start + Duration::days(day) + Duration::seconds(rng.gen_range(0..86_400));
            let id = format!("s{s:02}{j:04}");
            let tweet = Tweet::new(&id, format!("spam{s:02}"), ts, text_for(&mut rng, Kind::Spam, None));
            tweets.push(place(&mut rng, tweet, home, &origin));
            kinds.insert(id, Kind::Spam);
        }
    }
    tweets.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.tweet_id.cmp(&b.tweet_id)));
    let corpus = Corpus::new(tweets).expect("generated ids are unique");

    let (relevance_crowdflower, relevance_crisislex) = labeled(&mut rng, cfg.labeled_examples, cfg.relevant_mix);
    let sentiment_seed = rng.gen();
    let mut sentiment = sentiment_examples(sentiment_seed, cfg.sentiment_train + cfg.sentiment_test);
    let sentiment_test = sentiment.split_off(cfg.sentiment_train);

    let answer_key = CONVENTIONAL_TAGS.iter().chain(COINED_TAGS).map(|s| s.to_string()).collect();
    SynthWorld {
        corpus,
        geometry,
        manifest,
        relevance_crowdflower,
        relevance_crisislex,
        sentiment_train: sentiment,
        sentiment_test,
        answer_key,
        kinds,
    }
}

/// Adds `n` tweets by one new user inside a single UTC day, all carrying
/// a conventional hashtag and negative wording.
pub fn inject_spammer(corpus: &Corpus, user: &str, day: DateTime<Utc>, n: usize, fips: &str, seed: u64) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tweets = corpus.tweets().to_vec();
    for j in 0..n {
        let ts = day + Duration::seconds(rng.gen_range(0..86_400));
        let text = format!("{} #earthquake", sentence(&mut rng, DISASTER_WORDS, Some(Polarity::Negative)).join(" "));
        tweets.push(Tweet::new(format!("{user}-{j:05}"), user, ts, text).with_fips(fips));
    }
    Corpus::new(tweets)
}

/// Files written by [`write_bundle`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub dir: PathBuf,
    pub corpus: PathBuf,
    pub geometry: PathBuf,
    pub manifest: PathBuf,
    pub training: Vec<TrainingFile>,
    pub sentiment_train: PathBuf,
    pub sentiment_test: PathBuf,
    pub answer_key: PathBuf,
}

pub fn write_bundle(world: &SynthWorld, dir: &Path) -> Result<Bundle> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let b = Bundle {
        dir: dir.to_path_buf(),
        corpus: dir.join("tweets.jsonl"),
        geometry: dir.join("counties.geojson"),
        manifest: dir.join("manifest.json"),
        training: vec![
            TrainingFile { path: dir.join("relevance_crowdflower.csv"), disaster_type: DisasterType::Earthquake },
            TrainingFile { path: dir.join("relevance_crisislex.csv"), disaster_type: DisasterType::Earthquake },
        ],
        sentiment_train: dir.join("sentiment_train.csv"),
        sentiment_test: dir.join("sentiment_test.csv"),
        answer_key: dir.join("accepted_hashtags.txt"),
    };
    world.corpus.save_jsonl(&b.corpus)?;
    let geo = serde_json::to_string(&world.geometry.to_geojson())? + "\n";
    fs::write(&b.geometry, geo).map_err(|e| Error::io(&b.geometry, e))?;
    let manifest = serde_json::to_string_pretty(&world.manifest)? + "\n";
    fs::write(&b.manifest, manifest).map_err(|e| Error::io(&b.manifest, e))?;

    let mut crowdflower = world.relevance_crowdflower.clone();
    // a few undecided rows, which ingestion must drop
    crowdflower.extend((0..3).map(|i| LabeledExample {
        text: format!("not sure about this one {i}"),
        label: Label::NotRelated,
        confidence: 1.0,
        source: Source::CrowdflowerStyle,
    }));
    save_training_file(&b.training[0].path, &crowdflower)?;
    let mut raw = fs::read_to_string(&b.training[0].path).map_err(|e| Error::io(&b.training[0].path, e))?;
    for i in 0..3 {
        raw = raw.replace(&format!("not sure about this one {i},not related"), &format!("not sure about this one {i},can't decide"));
    }
    fs::write(&b.training[0].path, raw).map_err(|e| Error::io(&b.training[0].path, e))?;

    let mut w = csv::Writer::from_path(&b.training[1].path).map_err(|e| Error::Data(e.to_string()))?;
    w.write_record(["label", "text"])?;
    for ex in &world.relevance_crisislex {
        w.write_record([if ex.label == Label::Related { "on-topic" } else { "off-topic" }, ex.text.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(&b.training[1].path, e))?;

    save_sentiment_file(&b.sentiment_train, &world.sentiment_train)?;
    save_sentiment_file(&b.sentiment_test, &world.sentiment_test)?;
    let key: String = world.answer_key.iter().map(|h| format!("{h}\n")).collect();
    fs::write(&b.answer_key, key).map_err(|e| Error::io(&b.answer_key, e))?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{remove_spam, Tokenizer};
    use crate::matchfilter::{ConventionalClassifier, CoreKeywordSet};
    use crate::regions::partition;

    fn small() -> SynthConfig {
        SynthConfig { tweets: 800, users: 60, labeled_examples: 60, sentiment_train: 20, sentiment_test: 20, ..Default::default() }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small());
        let b = generate(&small());
        assert_eq!(a.corpus.tweets(), b.corpus.tweets());
        assert_eq!(a.relevance_crowdflower, b.relevance_crowdflower);
        assert_eq!(a.sentiment_test, b.sentiment_test);
    }

    #[test]
    fn planted_structure() {
        let w = generate(&small());
        assert_eq!(w.corpus.len(), 800);
        let (clean, stats) = remove_spam(&w.corpus, 15);
        assert_eq!(stats.spam_user_count, 4);
        assert!(clean.tweets().iter().all(|t| w.kinds[&t.tweet_id] != Kind::Spam));
        let parts = partition(&clean, &w.manifest, Some(&w.geometry)).unwrap();
        assert!(parts.dropped_outside > 0 && parts.dropped_out_of_window > 0);
        let conventional = ConventionalClassifier::from_manifest(&w.manifest, &CoreKeywordSet::default(), Tokenizer::default());
        for t in w.corpus.tweets() {
            match w.kinds[&t.tweet_id] {
                Kind::Conventional => assert!(conventional.is_relevant(t), "{}", t.text),
                Kind::Coined | Kind::Semantic | Kind::Irrelevant => assert!(!conventional.is_relevant(t), "{}", t.text),
                _ => {}
            }
        }
    }

    #[test]
    fn bundle_loads_back() {
        let w = generate(&small());
        let dir = tempfile::tempdir().unwrap();
        let b = write_bundle(&w, dir.path()).unwrap();
        let loaded = crate::corpus::load_corpus(&b.corpus).unwrap();
        assert!(loaded.errors.is_empty());
        assert_eq!(loaded.corpus.tweets(), w.corpus.tweets());
        assert_eq!(DisasterManifest::from_json_file(&b.manifest).unwrap(), w.manifest);
        assert_eq!(CountyGeometry::from_geojson_file(&b.geometry).unwrap().len(), 10);
        let (ex, stats) = crate::learner::load_training(&b.training, &[DisasterType::Earthquake]).unwrap();
        assert_eq!(stats.undecided, 3);
        assert!(stats.low_confidence > 0);
        assert_eq!(ex.len(), stats.kept);
    }
}
