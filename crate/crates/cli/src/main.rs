//! `onlab`: grammar-induction pipeline around an ordered-neuron LSTM
//! language model. Stages: `synth`/`ingest` -> `train` -> `parse` -> `eval`
//! -> `report`. Every stage records checksums in the run manifest and skips
//! itself when nothing changed.

mod commands;
mod config;
mod layout;
mod manifest;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use commands::ingest::{CorpusFormat, IngestArgs};
use config::Settings;
use layout::{data_root, RunPaths, DATA_DIR_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "onlab",
    version,
    about = "Language-model grammar induction: train, parse, evaluate",
    after_help = format!("Run outputs live under --data-dir, ${DATA_DIR_ENV}, or ./onlab-data.")
)]
struct Cli {
    /// Root directory for run outputs.
    #[arg(long, global = true, value_name = "DIR")]
    data_dir: Option<PathBuf>,

    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    /// Configuration file (`key = value` lines under [model]/[train]/[eval]).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. --set train.epochs=3.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct RunArg {
    /// Run name: directory under the data root holding all artifacts.
    #[arg(long)]
    run: String,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the bundled synthetic corpus as a flat treebank directory.
    Synth {
        /// Output directory (train.txt / dev.txt / test.txt).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5000)]
        sentences: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Normalize a treebank and build the vocabulary.
    Ingest {
        #[command(flatten)]
        run: RunArg,
        /// Corpus directory: flat (train.txt/dev.txt/test.txt) or PTB sections.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = ["auto", "flat", "ptb"], default_value = "auto")]
        format: String,
        #[arg(long, default_value_t = 10000)]
        max_vocab: usize,
        #[arg(long, default_value_t = 1)]
        min_freq: u64,
        /// Keep punctuation leaves instead of dropping them.
        #[arg(long)]
        keep_punctuation: bool,
        /// Keep functional label suffixes (NP-SBJ stays NP-SBJ).
        #[arg(long)]
        keep_label_suffixes: bool,
    },
    /// Train one checkpoint per seed.
    Train {
        #[command(flatten)]
        run: RunArg,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
    },
    /// Induce binary parses from checkpoints or the random baseline.
    Parse {
        #[command(flatten)]
        run: RunArg,
        #[arg(long, value_parser = ["train", "dev", "test"])]
        split: String,
        /// Use the short-sentence (< 10 tokens) view of the split.
        #[arg(long)]
        wsj10: bool,
        /// Model layer whose gates drive the parse (1-based).
        #[arg(long, default_value_t = 2)]
        layer: usize,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// Emit model-free random-baseline parses instead.
        #[arg(long, value_parser = ["random"])]
        baseline: Option<String>,
    },
    /// Score parses against the gold trees and write report tables.
    Eval {
        #[command(flatten)]
        run: RunArg,
        #[arg(long, value_parser = ["train", "dev", "test"])]
        split: String,
        #[arg(long)]
        wsj10: bool,
        #[arg(long, default_value_t = 2)]
        layer: usize,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
    },
    /// Print the evaluation tables of a run.
    Report {
        #[command(flatten)]
        run: RunArg,
    },
}

fn resolve_settings(cli: &Cli) -> Result<Settings> {
    let mut settings = match &cli.config {
        Some(path) => {
            let text = layout::read_to_string(path)?;
            Settings::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Settings::default(),
    };
    for ov in &cli.overrides {
        let (key, value) = ov
            .split_once('=')
            .with_context(|| format!("--set `{ov}`: expected SECTION.KEY=VALUE"))?;
        let (section, key) = key
            .split_once('.')
            .with_context(|| format!("--set `{ov}`: expected SECTION.KEY=VALUE"))?;
        settings
            .set(section.trim(), key.trim(), value.trim())
            .with_context(|| format!("--set `{ov}`"))?;
    }
    Ok(settings)
}

fn run(cli: Cli) -> Result<()> {
    let settings = resolve_settings(&cli)?;
    if cli.dump_config {
        print!("{}", settings.dump());
        return Ok(());
    }
    let root = data_root(cli.data_dir.as_deref());
    let Some(command) = cli.command else {
        anyhow::bail!("no subcommand given (try --help)");
    };
    match command {
        Command::Synth { out, sentences, seed } => commands::synth::run(&out, sentences, seed),
        Command::Ingest {
            run,
            corpus,
            format,
            max_vocab,
            min_freq,
            keep_punctuation,
            keep_label_suffixes,
        } => {
            let format = match format.as_str() {
                "flat" => CorpusFormat::Flat,
                "ptb" => CorpusFormat::Ptb,
                _ => CorpusFormat::Auto,
            };
            let args = IngestArgs {
                corpus,
                format,
                max_vocab,
                min_freq,
                keep_punctuation,
                keep_label_suffixes,
            };
            commands::ingest::run(&RunPaths::new(&root, &run.run), &args)
        }
        Command::Train { run, seeds, base_seed } => {
            let args = commands::train::TrainArgs { seeds, base_seed, settings };
            commands::train::run(&RunPaths::new(&root, &run.run), &args)
        }
        Command::Parse { run, split, wsj10, layer, seeds, base_seed, baseline } => {
            let args = commands::parse::ParseArgs {
                split,
                wsj10,
                layer,
                seeds,
                base_seed,
                random_baseline: baseline.is_some(),
            };
            commands::parse::run(&RunPaths::new(&root, &run.run), &args)
        }
        Command::Eval { run, split, wsj10, layer, seeds, base_seed } => {
            let args = commands::eval::EvalArgs {
                split,
                wsj10,
                layer,
                seeds,
                base_seed,
                settings: settings.eval,
            };
            commands::eval::run(&RunPaths::new(&root, &run.run), &args)
        }
        Command::Report { run } => commands::report::run(&RunPaths::new(&root, &run.run)),
    }
}

/// 0 success; 1 usage/configuration; 2 data problems; 3 numerical failure.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<onlab_core::Error>() {
            return match core {
                onlab_core::Error::Numerical { .. } => EXIT_NUMERICAL,
                onlab_core::Error::Config(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_DATA;
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { EXIT_USAGE };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}
