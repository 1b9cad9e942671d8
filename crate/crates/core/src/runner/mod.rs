//! Pipeline stages. Each stage reads the previous stages' files under the
//! output directory and writes its own, so stages can be rerun alone.

mod layout;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::PipelineConfig;
use crate::corpus::{build_hashtag_dict, load_corpus, remove_spam, Corpus, EmojiTable, SpamStats, Tokenizer};
use crate::error::{Error, Result};
use crate::evalreport::{
    emit_results, load_results, precision_recall, split_labeled, write_improvement, write_stamp, ComparisonRow,
    ImprovementRow, Method, MethodResult, RunStamp,
};
use crate::learner::{classify_learning, load_training, train_relevance, RelevancePipeline};
use crate::matchfilter::{
    expand_candidates, final_terms, review, sample_tweets, ConventionalClassifier, CoreKeywordSet, Decision,
    HashtagLedger, LedgerEntry, MatchingClassifier, ReviewOutcome, Reviewer,
};
use crate::regions::{partition, CountyGeometry, DisasterManifest, Region};
use crate::sentiment::{
    bin_counts, load_sentiment_file, predict_sentiment, train_sentiment, write_series, Granularity, SentimentModel,
};
use crate::synth::{self, SynthConfig};

pub use layout::Layout;

const REGIONS: [Region; 2] = [Region::Affected, Region::Unaffected];

/// What a stage produced.
#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub outputs: Vec<PathBuf>,
    pub summary: BTreeMap<String, Value>,
}

impl StageReport {
    fn new(stage: &str) -> Self {
        StageReport { stage: stage.to_string(), outputs: Vec::new(), summary: BTreeMap::new() }
    }

    fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }
}

/// Accepts exactly the hashtags in an answer key and rejects the rest.
pub struct AnswerKeyReviewer(pub BTreeSet<String>);

impl Reviewer for AnswerKeyReviewer {
    fn decide(&mut self, entry: &LedgerEntry, _: &[String], _: usize) -> Result<Decision> {
        Ok(if self.0.contains(&entry.hashtag) { Decision::Accept(None) } else { Decision::Reject(None) })
    }
}

pub fn read_answer_key(path: &Path) -> Result<BTreeSet<String>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(raw
        .lines()
        .map(|l| l.trim().trim_start_matches('#').to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

fn write_ids(path: &Path, ids: &BTreeSet<String>) -> Result<()> {
    let body: String = ids.iter().map(|id| format!("{id}\n")).collect();
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn read_ids(path: &Path) -> Result<BTreeSet<String>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(raw.lines().filter(|l| !l.is_empty()).map(str::to_string).collect())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&raw)?)
}

pub struct Runner {
    cfg: PipelineConfig,
    layout: Layout,
    tokenizer: Tokenizer,
    hash: String,
}

impl Runner {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let mut emoji = EmojiTable::default();
        if let Some(p) = &cfg.paths.emoji_map {
            emoji.extend_from_file(p)?;
        }
        let layout = Layout::new(cfg.out_dir());
        let hash = cfg.hash();
        Ok(Runner { cfg, layout, tokenizer: Tokenizer::new(emoji), hash })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    fn stamp(&self) -> RunStamp {
        RunStamp { config_hash: self.hash.clone(), seed: self.cfg.seed, note: None }
    }

    /// Stamps every output and appends the stage to `run_log.jsonl`.
    fn finish(&self, report: StageReport) -> Result<StageReport> {
        let stamp = self.stamp();
        for out in &report.outputs {
            if !crate::evalreport::stamp_path(out).exists() {
                write_stamp(out, &stamp)?;
            }
        }
        let log_path = self.layout.run_log();
        let line = serde_json::to_string(&json!({
            "stage": report.stage,
            "config_hash": self.hash,
            "seed": self.cfg.seed,
            "outputs": report.outputs,
            "summary": report.summary,
        }))?;
        let mut f = OpenOptions::new().create(true).append(true).open(&log_path).map_err(|e| Error::io(&log_path, e))?;
        writeln!(f, "{line}").map_err(|e| Error::io(&log_path, e))?;
        log::info!("{}: {}", report.stage, serde_json::to_string(&report.summary)?);
        Ok(report)
    }

    fn require(&self, path: &Path, stage: &str) -> Result<()> {
        if path.exists() {
            Ok(())
        } else {
            Err(Error::Config(format!("{} is missing; run `triage {stage}` first", path.display())))
        }
    }

    fn required_path<'a>(&self, p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        p.as_deref().ok_or_else(|| Error::Config(format!("no {what} path configured (paths.{what})")))
    }

    fn load_stage_corpus(&self, path: &Path, stage: &str) -> Result<Corpus> {
        self.require(path, stage)?;
        let report = load_corpus(path)?;
        if !report.errors.is_empty() {
            return Err(Error::Data(format!("{}: {} unreadable records", path.display(), report.errors.len())));
        }
        Ok(report.corpus)
    }

    fn manifest(&self) -> Result<DisasterManifest> {
        DisasterManifest::from_json_file(self.required_path(&self.cfg.paths.manifest, "manifest")?)
    }

    fn geometry(&self) -> Result<Option<CountyGeometry>> {
        self.cfg.paths.geometry.as_deref().map(CountyGeometry::from_geojson_file).transpose()
    }

    fn keywords(&self, manifest: &DisasterManifest) -> Vec<String> {
        let mut set = CoreKeywordSet::default();
        for (t, words) in &self.cfg.matching.extra_keywords {
            set.extend(*t, words.iter().cloned());
        }
        set.for_manifest(manifest)
    }

    fn region_corpus(&self, region: Region) -> Result<Corpus> {
        self.load_stage_corpus(&self.layout.region(region), "regions")
    }

    pub fn ingest(&self) -> Result<StageReport> {
        let src = self.required_path(&self.cfg.paths.corpus, "corpus")?;
        let loaded = load_corpus(src)?;
        self.layout.create()?;
        let mut r = StageReport::new("ingest");
        loaded.corpus.save_jsonl(&self.layout.corpus())?;
        let errors = self.layout.ingest_errors();
        let mut w = csv::Writer::from_path(&errors).map_err(|e| Error::Data(e.to_string()))?;
        w.write_record(["line", "message"])?;
        for e in &loaded.errors {
            w.write_record([e.line.to_string(), e.message.clone()])?;
        }
        w.flush().map_err(|e| Error::io(&errors, e))?;
        r.note("tweets", loaded.corpus.len());
        r.note("rejected_lines", loaded.errors.len());
        r.outputs = vec![self.layout.corpus(), errors];
        self.finish(r)
    }

    pub fn despam(&self) -> Result<StageReport> {
        let corpus = self.load_stage_corpus(&self.layout.corpus(), "ingest")?;
        let (kept, stats) = remove_spam(&corpus, self.cfg.spam_threshold);
        let mut r = StageReport::new("despam");
        kept.save_jsonl(&self.layout.despammed())?;
        write_json(&self.layout.spam_stats(), &stats)?;
        let spammers: BTreeSet<String> = crate::corpus::spam_users(&corpus, self.cfg.spam_threshold);
        write_ids(&self.layout.spam_users(), &spammers)?;
        r.note("spam_users", stats.spam_user_count);
        r.note("spam_tweets", stats.spam_tweet_count);
        r.note("spam_ratio", stats.spam_ratio());
        r.outputs = vec![self.layout.despammed(), self.layout.spam_stats(), self.layout.spam_users()];
        self.finish(r)
    }

    pub fn regions(&self) -> Result<StageReport> {
        let corpus = self.load_stage_corpus(&self.layout.despammed(), "despam")?;
        let manifest = self.manifest()?;
        let geom = self.geometry()?;
        let parts = partition(&corpus, &manifest, geom.as_ref())?;
        let mut r = StageReport::new("regions");
        for region in REGIONS {
            let path = self.layout.region(region);
            parts.region(region).save_jsonl(&path)?;
            r.outputs.push(path);
            r.note(region.as_str(), parts.region(region).len());
        }
        r.note("dropped_outside", parts.dropped_outside);
        r.note("dropped_out_of_window", parts.dropped_out_of_window);
        self.finish(r)
    }

    pub fn hashtags_expand(&self) -> Result<StageReport> {
        let manifest = self.manifest()?;
        let mut tweets = Vec::new();
        for region in REGIONS {
            tweets.extend(self.region_corpus(region)?.into_tweets());
        }
        let corpus = Corpus::new(tweets)?;
        let dict = build_hashtag_dict(&corpus, &self.tokenizer);
        let mut by_count: Vec<(&str, usize)> = dict.iter().collect();
        by_count.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let dict_path = self.layout.hashtag_dict();
        let mut w = csv::Writer::from_path(&dict_path).map_err(|e| Error::Data(e.to_string()))?;
        w.write_record(["hashtag", "count"])?;
        for (tag, n) in &by_count {
            w.write_record([tag.to_string(), n.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&dict_path, e))?;

        let candidates = expand_candidates(&self.keywords(&manifest), &dict);
        let ledger_path = self.cfg.ledger_path();
        let mut ledger = if ledger_path.exists() { HashtagLedger::load(&ledger_path)? } else { HashtagLedger::default() };
        let added = ledger.merge_candidates(candidates.iter().map(|c| (c.as_str(), dict.count(c))));
        if let Some(dir) = ledger_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        ledger.save(&ledger_path)?;
        let mut r = StageReport::new("hashtags expand");
        r.note("hashtags", dict.len());
        r.note("candidates", candidates.len());
        r.note("new_candidates", added);
        r.outputs = vec![dict_path, ledger_path];
        self.finish(r)
    }

    /// Review session over the ledger's pending candidates.
    pub fn hashtags_review(&self, reviewer: &mut dyn Reviewer, now: impl FnMut() -> DateTime<Utc>) -> Result<ReviewOutcome> {
        let ledger_path = self.cfg.ledger_path();
        self.require(&ledger_path, "hashtags expand")?;
        let mut ledger = HashtagLedger::load(&ledger_path)?;
        let mut tweets = Vec::new();
        for region in REGIONS {
            tweets.extend(self.region_corpus(region)?.into_tweets());
        }
        let pending: Vec<String> = ledger
            .with_status(crate::matchfilter::HashtagStatus::Candidate)
            .map(|e| e.hashtag.clone())
            .collect();
        let samples = sample_tweets(&Corpus::new(tweets)?, &self.tokenizer, &pending);
        let outcome = review(&mut ledger, &ledger_path, &samples, reviewer, now)?;
        let mut r = StageReport::new("hashtags review");
        r.note("accepted", outcome.accepted);
        r.note("rejected", outcome.rejected);
        r.note("skipped", outcome.skipped);
        r.note("quit", outcome.quit);
        r.outputs = vec![ledger_path];
        self.finish(r)?;
        Ok(outcome)
    }

    pub fn match_stage(&self) -> Result<StageReport> {
        let manifest = self.manifest()?;
        let keywords = self.keywords(&manifest);
        let ledger_path = self.cfg.ledger_path();
        let ledger = if ledger_path.exists() {
            Some(HashtagLedger::load(&ledger_path)?)
        } else {
            log::warn!("no hashtag ledger at {}; matching on keywords only", ledger_path.display());
            None
        };
        let terms = final_terms(&keywords, ledger.as_ref());
        let matcher = MatchingClassifier::new(terms.clone(), self.cfg.matching.keyword_match, self.tokenizer.clone());
        let conventional = ConventionalClassifier::from_manifest(&manifest, &{
            let mut set = CoreKeywordSet::default();
            for (t, words) in &self.cfg.matching.extra_keywords {
                set.extend(*t, words.iter().cloned());
            }
            set
        }, self.tokenizer.clone());
        let mut r = StageReport::new("match");
        let (mut n_ours, mut n_conv) = (0, 0);
        for region in REGIONS {
            let corpus = self.region_corpus(region)?;
            let ours: BTreeSet<String> =
                corpus.tweets().iter().filter(|t| matcher.is_relevant(t)).map(|t| t.tweet_id.clone()).collect();
            let conv: BTreeSet<String> =
                corpus.tweets().iter().filter(|t| conventional.is_relevant(t)).map(|t| t.tweet_id.clone()).collect();
            n_ours += ours.len();
            n_conv += conv.len();
            r.note(&format!("{region}_matching"), ours.len());
            r.note(&format!("{region}_conventional"), conv.len());
            write_ids(&self.layout.matching_ids(region), &ours)?;
            write_ids(&self.layout.conventional_ids(region), &conv)?;
            r.outputs.push(self.layout.matching_ids(region));
            r.outputs.push(self.layout.conventional_ids(region));
        }
        let row = ImprovementRow { disaster_id: manifest.disaster_id.clone(), n_improved: n_ours, n_conventional: n_conv };
        r.note("improvement_pct", row.gain_pct());
        r.note("accepted_hashtags", terms.hashtags.len());
        write_improvement(&self.layout.improvement(), &[row])?;
        r.outputs.push(self.layout.improvement());
        self.finish(r)
    }

    fn segmentation_extras(&self, manifest: &DisasterManifest) -> Result<Vec<String>> {
        let mut extras = self.keywords(manifest);
        extras.extend(manifest.area_name.iter().cloned());
        if let Some(geom) = self.geometry()? {
            for f in geom.fips() {
                if let Some(name) = geom.name(f) {
                    extras.push(name.to_lowercase());
                }
            }
        }
        Ok(extras)
    }

    pub fn train_relevance(&self) -> Result<StageReport> {
        let manifest = self.manifest()?;
        if self.cfg.paths.training.is_empty() {
            return Err(Error::Config("no training files configured (paths.training)".into()));
        }
        let types: Vec<_> = manifest.types.iter().copied().collect();
        let (examples, stats) = load_training(&self.cfg.paths.training, &types)?;
        let mut unlabeled = Vec::new();
        for region in REGIONS {
            if self.layout.region(region).exists() {
                unlabeled.extend(self.region_corpus(region)?.tweets().iter().map(|t| t.text.clone()));
            }
        }
        let extras = self.segmentation_extras(&manifest)?;
        let pipeline =
            train_relevance(&types, &examples, &unlabeled, &extras, &self.tokenizer, &self.cfg.relevance, self.cfg.seed)?;
        fs::create_dir_all(self.layout.models()).map_err(|e| Error::io(self.layout.models(), e))?;
        pipeline.save(&self.layout.relevance_model())?;
        let mut r = StageReport::new("train-relevance");
        r.note("rows", stats.rows);
        r.note("examples", examples.len());
        r.note("dropped_undecided", stats.undecided);
        r.note("dropped_low_confidence", stats.low_confidence);
        r.note("features", pipeline.featurizer.dim());
        r.outputs = vec![self.layout.relevance_model()];
        self.finish(r)
    }

    pub fn classify(&self) -> Result<StageReport> {
        self.require(&self.layout.relevance_model(), "train-relevance")?;
        let pipeline = RelevancePipeline::load(&self.layout.relevance_model())?;
        let mut r = StageReport::new("classify");
        for region in REGIONS {
            let corpus = self.region_corpus(region)?;
            let ids = classify_learning(&corpus, &pipeline, &self.tokenizer);
            r.note(&format!("{region}_learning"), ids.len());
            write_ids(&self.layout.learning_ids(region), &ids)?;
            r.outputs.push(self.layout.learning_ids(region));
        }
        self.finish(r)
    }

    fn relevant_tweets(&self, region: Region) -> Result<Vec<crate::corpus::Tweet>> {
        let ids = read_ids(&self.layout.matching_ids(region))?;
        Ok(self.region_corpus(region)?.into_tweets().into_iter().filter(|t| ids.contains(&t.tweet_id)).collect())
    }

    pub fn train_sentiment(&self) -> Result<StageReport> {
        let train_path = self.required_path(&self.cfg.paths.sentiment_train, "sentiment_train")?;
        let labeled = load_sentiment_file(train_path)?;
        let (train, test) = match &self.cfg.paths.sentiment_test {
            Some(p) => (labeled, load_sentiment_file(p)?),
            None => split_labeled(&labeled, self.cfg.sentiment.split_ratio, self.cfg.seed),
        };
        let mut unlabeled = Vec::new();
        for region in REGIONS {
            if self.layout.matching_ids(region).exists() {
                unlabeled.extend(self.relevant_tweets(region)?.into_iter().map(|t| t.text));
            }
        }
        let (model, accuracy) =
            train_sentiment(&train, &test, &unlabeled, &self.tokenizer, &self.cfg.sentiment.model, self.cfg.seed)?;
        fs::create_dir_all(self.layout.models()).map_err(|e| Error::io(self.layout.models(), e))?;
        model.save(&self.layout.sentiment_model())?;
        let acc_path = self.layout.sentiment_accuracy();
        fs::create_dir_all(self.layout.sentiment_dir()).map_err(|e| Error::io(self.layout.sentiment_dir(), e))?;
        write_json(
            &acc_path,
            &json!({ "n_train": train.len(), "n_test": test.len(), "accuracy": accuracy.map_or(json!("n/a"), |a| json!(a)) }),
        )?;
        let mut r = StageReport::new("train-sentiment");
        r.note("n_train", train.len());
        r.note("n_test", test.len());
        r.note("accuracy", accuracy.map_or(json!("n/a"), |a| json!(a)));
        r.outputs = vec![self.layout.sentiment_model(), acc_path];
        self.finish(r)
    }

    pub fn sentiment(&self) -> Result<StageReport> {
        self.require(&self.layout.sentiment_model(), "train-sentiment")?;
        let model = SentimentModel::load(&self.layout.sentiment_model())?;
        let manifest = self.manifest()?;
        let (start, end) = manifest.window();
        let granularity = self.cfg.sentiment.granularity;
        let mut r = StageReport::new("sentiment");
        for region in REGIONS {
            self.require(&self.layout.matching_ids(region), "match")?;
            let tweets = self.relevant_tweets(region)?;
            let labels = predict_sentiment(&tweets, &model, &self.tokenizer);
            let labels_path = self.layout.sentiment_labels(region);
            let mut w = csv::Writer::from_path(&labels_path).map_err(|e| Error::Data(e.to_string()))?;
            w.write_record(["tweet_id", "timestamp", "polarity"])?;
            for (t, p) in tweets.iter().zip(&labels) {
                w.write_record([
                    t.tweet_id.as_str(),
                    &t.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                    p.as_str(),
                ])?;
            }
            w.flush().map_err(|e| Error::io(&labels_path, e))?;
            let stamped: Vec<_> = tweets.iter().map(|t| t.timestamp).zip(labels.iter().copied()).collect();
            let bins = bin_counts(&stamped, granularity, start, end)?;
            let series_path = self.layout.sentiment_series(region, granularity);
            write_series(&series_path, &bins)?;
            let pos = labels.iter().filter(|p| **p == crate::sentiment::Polarity::Positive).count();
            r.note(&format!("{region}_positive"), pos);
            r.note(&format!("{region}_negative"), labels.len() - pos);
            r.outputs.push(labels_path);
            r.outputs.push(series_path);
        }
        self.finish(r)
    }

    pub fn eval(&self) -> Result<StageReport> {
        let manifest = self.manifest()?;
        self.require(&self.layout.spam_stats(), "despam")?;
        let stats: SpamStats = read_json(&self.layout.spam_stats())?;
        let mut rows = Vec::new();
        let mut r = StageReport::new("eval");
        for region in REGIONS {
            self.require(&self.layout.matching_ids(region), "match")?;
            self.require(&self.layout.learning_ids(region), "classify")?;
            let total = self.region_corpus(region)?.len();
            let matching = MethodResult {
                method: Method::Matching,
                region,
                relevant_ids: read_ids(&self.layout.matching_ids(region))?,
                total_in_region: total,
            };
            let learning = MethodResult {
                method: Method::Learning,
                region,
                relevant_ids: read_ids(&self.layout.learning_ids(region))?,
                total_in_region: total,
            };
            rows.push(ComparisonRow::from_results(&manifest.disaster_id, &matching, &learning, stats.spam_ratio())?);
        }
        fs::create_dir_all(self.layout.results_dir()).map_err(|e| Error::io(self.layout.results_dir(), e))?;
        r.outputs = emit_results(&self.layout.results(), &rows, &self.stamp())?;
        if self.layout.improvement().exists() {
            let dest = self.layout.results_dir().join("improvement.csv");
            fs::copy(self.layout.improvement(), &dest).map_err(|e| Error::io(&dest, e))?;
            r.outputs.push(dest);
        }
        if !self.cfg.paths.training.is_empty() {
            r.outputs.push(self.labeled_comparison(&manifest)?);
        }
        for row in &rows {
            r.note(&format!("{}_recall_matching", row.region), row.recall_matching);
            r.note(&format!("{}_recall_learning", row.region), row.recall_learning);
            r.note(&format!("{}_relevance_matching", row.region), row.relevance_matching);
        }
        self.finish(r)
    }

    /// Precision and recall of both methods on a held-out half of the
    /// labeled relevance data.
    fn labeled_comparison(&self, manifest: &DisasterManifest) -> Result<PathBuf> {
        let types: Vec<_> = manifest.types.iter().copied().collect();
        let (examples, _) = load_training(&self.cfg.paths.training, &types)?;
        let (train, test) = split_labeled(&examples, 0.5, self.cfg.seed);
        let extras = self.segmentation_extras(manifest)?;
        let pipeline = train_relevance(&types, &train, &[], &extras, &self.tokenizer, &self.cfg.relevance, self.cfg.seed)?;
        let ledger_path = self.cfg.ledger_path();
        let ledger = if ledger_path.exists() { Some(HashtagLedger::load(&ledger_path)?) } else { None };
        let matcher = MatchingClassifier::new(
            final_terms(&self.keywords(manifest), ledger.as_ref()),
            self.cfg.matching.keyword_match,
            self.tokenizer.clone(),
        );
        let ids: Vec<String> = (0..test.len()).map(|i| format!("{i}")).collect();
        let universe: BTreeSet<String> = ids.iter().cloned().collect();
        let truth: BTreeSet<String> =
            test.iter().zip(&ids).filter(|(e, _)| e.label.is_related()).map(|(_, id)| id.clone()).collect();
        let epoch = DateTime::<Utc>::UNIX_EPOCH;
        let by_matching: BTreeSet<String> = test
            .iter()
            .zip(&ids)
            .filter(|(e, id)| matcher.is_relevant(&crate::corpus::Tweet::new(id.as_str(), "labeled", epoch, e.text.as_str())))
            .map(|(_, id)| id.clone())
            .collect();
        let by_learning: BTreeSet<String> = test
            .iter()
            .zip(&ids)
            .filter(|(e, _)| pipeline.is_relevant(&e.text, &self.tokenizer))
            .map(|(_, id)| id.clone())
            .collect();
        let path = self.layout.results_dir().join("labeled_comparison.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Data(e.to_string()))?;
        w.write_record(["method", "n_test", "n_predicted", "precision", "recall"])?;
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| x.to_string());
        for (name, set) in [("matching", &by_matching), ("learning", &by_learning)] {
            let pr = precision_recall(set, &truth, &universe);
            w.write_record([name.to_string(), test.len().to_string(), set.len().to_string(), fmt(pr.precision), fmt(pr.recall)])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Markdown summary of the results directory.
    pub fn report(&self) -> Result<(StageReport, String)> {
        self.require(&self.layout.results(), "eval")?;
        let rows = load_results(&self.layout.results())?;
        let mut md = String::from("# Relevance report\n\n");
        md.push_str("| disaster | region | matching | learning | agreement | recall matching % | recall learning % | relevance matching % | relevance learning % | spam % |\n");
        md.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
        let f = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"));
        for row in &rows {
            md.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
                row.disaster_id,
                row.region,
                row.n_matching,
                row.n_learning,
                row.n_agreement,
                f(row.recall_matching),
                f(row.recall_learning),
                f(row.relevance_matching),
                f(row.relevance_learning),
                f(row.spam_ratio)
            ));
        }
        md.push_str(&format!("\n{}\n", crate::evalreport::RECALL_CONVENTION));
        let improvement = self.layout.results_dir().join("improvement.csv");
        if improvement.exists() {
            let raw = fs::read_to_string(&improvement).map_err(|e| Error::io(&improvement, e))?;
            md.push_str("\n## Improvement over conventional hashtags\n\n```\n");
            md.push_str(&raw);
            md.push_str("```\n");
        }
        let labeled = self.layout.results_dir().join("labeled_comparison.csv");
        if labeled.exists() {
            let raw = fs::read_to_string(&labeled).map_err(|e| Error::io(&labeled, e))?;
            md.push_str("\n## Held-out labeled data\n\n```\n");
            md.push_str(&raw);
            md.push_str("```\n");
        }
        if self.layout.sentiment_accuracy().exists() {
            let acc: Value = read_json(&self.layout.sentiment_accuracy())?;
            md.push_str(&format!("\nSentiment test accuracy: {}\n", acc["accuracy"]));
        }
        let path = self.layout.report();
        fs::write(&path, &md).map_err(|e| Error::io(&path, e))?;
        let mut r = StageReport::new("report");
        r.note("rows", rows.len());
        r.outputs = vec![path];
        Ok((self.finish(r)?, md))
    }
}

/// Desk-scale settings for the synthetic corpus. Subsampling is off
/// because at a few thousand tokens the usual threshold drops nearly
/// every word, and short documents need more passes before their
/// vectors separate.
pub fn demo_config(bundle: &synth::Bundle, out_dir: &Path, seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig { seed, ..PipelineConfig::default() };
    cfg.paths.corpus = Some(bundle.corpus.clone());
    cfg.paths.manifest = Some(bundle.manifest.clone());
    cfg.paths.geometry = Some(bundle.geometry.clone());
    cfg.paths.training = bundle.training.clone();
    cfg.paths.sentiment_train = Some(bundle.sentiment_train.clone());
    cfg.paths.sentiment_test = Some(bundle.sentiment_test.clone());
    cfg.paths.out_dir = Some(out_dir.to_path_buf());
    cfg.sentiment.model.doc2vec.subsample = 0.0;
    cfg.sentiment.model.doc2vec.epochs = 200;
    cfg.sentiment.granularity = Granularity::Day;
    cfg
}

/// Generates the synthetic bundle under `<out>/inputs` and runs every
/// stage, reviewing hashtags against the bundle's answer key.
pub fn demo(out_dir: &Path, seed: u64, synth_cfg: &SynthConfig) -> Result<(Runner, Vec<StageReport>)> {
    let world = synth::generate(synth_cfg);
    let bundle = synth::write_bundle(&world, &out_dir.join("inputs"))?;
    let mut portable = demo_config(&bundle, out_dir, seed);
    portable.paths = portable.paths.relative_to(out_dir);
    let cfg_path = out_dir.join("demo_config.toml");
    fs::write(&cfg_path, portable.to_toml()?).map_err(|e| Error::io(&cfg_path, e))?;
    let runner = Runner::new(PipelineConfig::from_file(&cfg_path)?)?;
    let mut reports = vec![runner.ingest()?, runner.despam()?, runner.regions()?, runner.hashtags_expand()?];
    let mut reviewer = AnswerKeyReviewer(read_answer_key(&bundle.answer_key)?);
    let (_, end) = world.manifest.window();
    runner.hashtags_review(&mut reviewer, || end)?;
    reports.push(runner.match_stage()?);
    reports.push(runner.train_relevance()?);
    reports.push(runner.classify()?);
    reports.push(runner.train_sentiment()?);
    reports.push(runner.sentiment()?);
    reports.push(runner.eval()?);
    reports.push(runner.report()?.0);
    Ok((runner, reports))
}
