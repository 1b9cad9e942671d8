use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use triage_core::config::PipelineConfig;
use triage_core::regions::DisasterManifest;
use triage_core::runner::{demo, demo_config, Runner};
use triage_core::synth::{self, SynthConfig};
use triage_core::Error;

fn small_synth() -> SynthConfig {
    SynthConfig { tweets: 1500, users: 150, labeled_examples: 300, sentiment_train: 60, sentiment_test: 60, ..SynthConfig::default() }
}

/// Every data file under `root`, excluding stamps, logs and the written config.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let name = path.file_name().unwrap().to_string_lossy().to_string();
            if name.ends_with(".meta.json") || name == "run_log.jsonl" || name == "demo_config.toml" {
                continue;
            }
            out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
        }
    }
    out
}

#[test]
fn stage_without_its_input_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig { paths: triage_core::config::Paths { out_dir: Some(dir.path().into()), ..Default::default() }, ..Default::default() };
    let runner = Runner::new(cfg).unwrap();
    let err = runner.despam().unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("triage ingest"), "{err}");
    assert_eq!(err.exit_code(), 1);
    assert_eq!(runner.ingest().unwrap_err().exit_code(), 1);
}

#[test]
fn demo_is_reproducible_across_output_dirs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    demo(a.path(), 4, &small_synth()).unwrap();
    demo(b.path(), 4, &small_synth()).unwrap();
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
    for (k, v) in &sa {
        assert!(v == &sb[k], "{} differs", k.display());
    }
}

type Stage = Box<dyn Fn(&Runner) -> triage_core::Result<()>>;

#[test]
fn rerunning_each_stage_in_place_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (runner, _) = demo(dir.path(), 4, &small_synth()).unwrap();
    let before = snapshot(dir.path());
    let stages: Vec<(&str, Stage)> = vec![
        ("ingest", Box::new(|r| r.ingest().map(drop))),
        ("despam", Box::new(|r| r.despam().map(drop))),
        ("regions", Box::new(|r| r.regions().map(drop))),
        ("hashtags expand", Box::new(|r| r.hashtags_expand().map(drop))),
        ("match", Box::new(|r| r.match_stage().map(drop))),
        ("train-relevance", Box::new(|r| r.train_relevance().map(drop))),
        ("classify", Box::new(|r| r.classify().map(drop))),
        ("train-sentiment", Box::new(|r| r.train_sentiment().map(drop))),
        ("sentiment", Box::new(|r| r.sentiment().map(drop))),
        ("eval", Box::new(|r| r.eval().map(drop))),
        ("report", Box::new(|r| r.report().map(drop))),
    ];
    for (name, run) in &stages {
        run(&runner).unwrap();
        let after = snapshot(dir.path());
        for (k, v) in &before {
            assert!(after.get(k) == Some(v), "stage {name} changed {}", k.display());
        }
    }
}

#[test]
fn run_log_and_stamps_carry_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let (runner, reports) = demo(dir.path(), 4, &small_synth()).unwrap();
    let log = fs::read_to_string(runner.layout().run_log()).unwrap();
    let lines: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), reports.len() + 1); // review logs too
    for l in &lines {
        assert_eq!(l["config_hash"], runner.config_hash());
        assert_eq!(l["seed"], 4);
    }
    for r in &reports {
        for out in &r.outputs {
            let stamp: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(triage_core::evalreport::stamp_path(out)).unwrap()).unwrap();
            assert_eq!(stamp["config_hash"], runner.config_hash(), "{}", out.display());
        }
    }
}

#[test]
fn matching_without_a_ledger_uses_keywords_only() {
    let dir = tempfile::tempdir().unwrap();
    let world = synth::generate(&small_synth());
    let bundle = synth::write_bundle(&world, &dir.path().join("inputs")).unwrap();
    let runner = Runner::new(demo_config(&bundle, &dir.path().join("out"), 1)).unwrap();
    runner.ingest().unwrap();
    runner.despam().unwrap();
    runner.regions().unwrap();
    let r = runner.match_stage().unwrap();
    assert_eq!(r.summary["accepted_hashtags"], 0);
    assert!(r.summary["affected_matching"].as_u64().unwrap() > 0);
}

#[test]
fn napa_manifest_fixture() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/napa_earthquake.json");
    let m = DisasterManifest::from_json_file(&path).unwrap();
    assert_eq!(m.fema_code, "4193");
    assert_eq!(m.duration_days, 16);
    assert_eq!(m.affected_fips.len(), 2);
    assert_eq!(m.resolved_vicinity(None).len(), 58);
    let (start, end) = m.window();
    assert_eq!(start.to_rfc3339(), "2014-08-24T00:00:00+00:00");
    assert_eq!((end - start).num_days(), 16);
}
