use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::Utc;
use clap::{Parser, Subcommand};
use triage_core::config::PipelineConfig;
use triage_core::matchfilter::TerminalReviewer;
use triage_core::runner::{self, read_answer_key, AnswerKeyReviewer, Runner, StageReport};
use triage_core::synth::SynthConfig;
use triage_core::{Error, Result};

/// Identify disaster-relevant tweets and track their sentiment.
#[derive(Parser, Debug)]
#[command(name = "triage", version)]
struct Cli {
    /// TOML or JSON config file. Falls back to $TRIAGE_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the resolved configuration as TOML.
    ShowConfig,
    /// Read the raw tweet file into the working corpus.
    Ingest,
    /// Drop users who post more than the daily threshold on any day.
    Despam,
    /// Split the despammed corpus into affected and unaffected regions.
    Regions,
    /// Hashtag dictionary and review ledger.
    Hashtags {
        #[command(subcommand)]
        action: HashtagAction,
    },
    /// Keyword and hashtag matching, plus the conventional baseline.
    Match,
    /// Train the learned relevance classifier on labeled files.
    TrainRelevance,
    /// Apply the learned relevance classifier to both regions.
    Classify,
    /// Train the sentiment model.
    TrainSentiment,
    /// Label relevant tweets and write sentiment time series.
    Sentiment,
    /// Compare matching and learning; write results tables.
    Eval,
    /// Render results as markdown and print it.
    Report,
    /// Generate a synthetic corpus and run every stage on it.
    Demo {
        /// Seed for the synthetic corpus.
        #[arg(long, default_value_t = SynthConfig::default().seed)]
        synth_seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum HashtagAction {
    /// Build the hashtag dictionary and add candidates to the ledger.
    Expand,
    /// Accept or reject pending candidates.
    Review {
        /// Ledger file, overriding the configured one.
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Accept exactly the hashtags listed in this file (one per line)
        /// and reject the rest, without prompting.
        #[arg(long)]
        accept_file: Option<PathBuf>,
    },
}

fn print_report(r: &StageReport) {
    println!("{}", r.stage);
    for (k, v) in &r.summary {
        println!("  {k}: {v}");
    }
    for o in &r.outputs {
        println!("  wrote {}", o.display());
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::resolve(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.paths.out_dir = Some(out.clone());
    }
    if let Command::Hashtags { action: HashtagAction::Review { ledger: Some(l), .. } } = &cli.command {
        cfg.paths.ledger = Some(l.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Command::Demo { synth_seed } = cli.command {
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        let synth = SynthConfig { seed: synth_seed, ..SynthConfig::default() };
        let (runner, reports) = runner::demo(&out, cli.seed.unwrap_or(1), &synth)?;
        for r in &reports {
            print_report(r);
        }
        let md = std::fs::read_to_string(runner.layout().report()).map_err(|e| Error::io(runner.layout().report(), e))?;
        println!("\n{md}");
        return Ok(());
    }
    let cfg = load_config(&cli)?;
    if let Command::ShowConfig = cli.command {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    let runner = Runner::new(cfg)?;
    let report = match &cli.command {
        Command::Ingest => runner.ingest()?,
        Command::Despam => runner.despam()?,
        Command::Regions => runner.regions()?,
        Command::Hashtags { action: HashtagAction::Expand } => runner.hashtags_expand()?,
        Command::Hashtags { action: HashtagAction::Review { accept_file, .. } } => {
            let outcome = match accept_file {
                Some(path) => {
                    let mut reviewer = AnswerKeyReviewer(read_answer_key(path)?);
                    runner.hashtags_review(&mut reviewer, Utc::now)?
                }
                None => {
                    let stdin = io::stdin();
                    let mut reviewer = TerminalReviewer::new(stdin.lock(), io::stdout());
                    runner.hashtags_review(&mut reviewer, Utc::now)?
                }
            };
            println!(
                "accepted {}, rejected {}, skipped {}{}",
                outcome.accepted,
                outcome.rejected,
                outcome.skipped,
                if outcome.quit { " (quit early)" } else { "" }
            );
            return Ok(());
        }
        Command::Match => runner.match_stage()?,
        Command::TrainRelevance => runner.train_relevance()?,
        Command::Classify => runner.classify()?,
        Command::TrainSentiment => runner.train_sentiment()?,
        Command::Sentiment => runner.sentiment()?,
        Command::Eval => runner.eval()?,
        Command::Report => {
            let (_, md) = runner.report()?;
            print!("{md}");
            return Ok(());
        }
        Command::ShowConfig | Command::Demo { .. } => unreachable!(),
    };
    print_report(&report);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = io::stdout().flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

