//! Unified entry point for the quality-estimation toolkit.
//!
//! Every command reads its settings from a TOML config file (plus flag
//! overrides), prints a run manifest naming the command, seed, input hashes,
//! and output paths, and is byte-for-byte reproducible given the same config
//! and seed. Environment variables are never consulted.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tqe_core::error::Error;

use config::RunConfig;
use manifest::Manifest;

#[derive(Parser, Debug)]
#[command(name = "tqe", version, about = "Translation quality estimation toolkit")]
struct Cli {
    /// Configuration file (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Global seed; overrides the config file's `seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Override one config key, e.g. --set stages.pretrain.epochs=30.
    /// May repeat.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Increase log verbosity (-v info, -vv debug). Logs go to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build synthetic examples from parallel data by translating and
    /// degrading hypotheses.
    Synth {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Dataset file format (tsv or jsonl); inferred from the extension
        /// when omitted.
        #[arg(long)]
        format: Option<String>,
    },
    /// Score a dataset with the configured scorer panel, producing a score
    /// matrix file.
    Label {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
    /// With --matrix: aggregate a score matrix onto the dataset (rank-z per
    /// scorer, mean per example). Without: rank-z renormalize existing
    /// scores per language pair.
    Normalize {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Score matrix produced by `label`.
        #[arg(long, value_name = "PATH")]
        matrix: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Quality-bin prune a scored dataset (per language pair).
    Prune {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
    /// Split a dataset into three parts, one per input format.
    Split {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
    /// Run one training stage; `finetune_dev` with `cv = true` first picks
    /// hyperparameters by 5-fold cross-validation.
    Train {
        /// pretrain, finetune_da, finetune_mqm, or finetune_dev.
        #[arg(long)]
        stage: String,
        /// Checkpoint to write.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Dataset path; overrides the stage section's `data`.
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        /// Start from this checkpoint instead of a fresh initialization.
        #[arg(long, value_name = "PATH")]
        init_from: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Predict quality scores with one checkpoint (source-only by default).
    Predict {
        #[arg(long, value_name = "PATH")]
        ckpt: PathBuf,
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// src, ref, or src_ref.
        #[arg(long)]
        input_format: Option<String>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Combine several checkpoints' predictions (z-normalize then average),
    /// optionally pre-selecting the top members on a dev set.
    Ensemble {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Member checkpoints, comma separated; defaults to [ensemble]
        /// members.
        #[arg(long, value_delimiter = ',', value_name = "PATHS")]
        members: Vec<PathBuf>,
        /// Keep only the k members with the best dev Spearman.
        #[arg(long, value_name = "K")]
        select_top_k: Option<usize>,
        /// Dev set for member selection.
        #[arg(long, value_name = "PATH")]
        dev: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Correlate predictions with a dataset's gold scores.
    Evaluate {
        /// Gold-scored dataset.
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Predictions file (id<TAB>score).
        #[arg(long, value_name = "PATH")]
        preds: PathBuf,
        /// Report file; .json extension selects JSON, anything else TSV.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// pooled or per_lp.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Cumulative distribution of a dataset's scores as two-column TSV.
    Report {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Comma-separated ascending thresholds; defaults to an even grid
        /// over the observed range.
        #[arg(long)]
        thresholds: Option<String>,
        #[arg(long)]
        format: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Label { .. } => "label",
            Command::Normalize { .. } => "normalize",
            Command::Prune { .. } => "prune",
            Command::Split { .. } => "split",
            Command::Train { .. } => "train",
            Command::Predict { .. } => "predict",
            Command::Ensemble { .. } => "ensemble",
            Command::Evaluate { .. } => "evaluate",
            Command::Report { .. } => "report",
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 1,
        Error::Io { .. }
        | Error::Malformed { .. }
        | Error::Data(_)
        | Error::CheckpointVersion { .. }
        | Error::CheckpointCorrupt(_)
        | Error::Provider(_) => 2,
        Error::Numeric(_) => 3,
    }
}

fn run(cli: &Cli) -> tqe_core::error::Result<()> {
    let config = RunConfig::load(cli.config.as_ref(), &cli.overrides, cli.seed)?;
    let seed = config.seed()?;
    let mut manifest = Manifest::new(cli.command.name(), seed);
    manifest.config(cli.config.as_deref())?;

    let fmt = |o: &Option<String>| -> Option<String> { o.clone() };
    match &cli.command {
        Command::Synth { input, out, format } => {
            commands::synth(&config, &mut manifest, input, out, fmt(format).as_deref())?
        }
        Command::Label { input, out, format } => {
            commands::label_cmd(&config, &mut manifest, input, out, fmt(format).as_deref())?
        }
        Command::Normalize {
            input,
            out,
            matrix,
            format,
        } => commands::normalize(
            &mut manifest,
            input,
            out,
            matrix.as_deref(),
            fmt(format).as_deref(),
        )?,
        Command::Prune { input, out, format } => {
            commands::prune(&config, &mut manifest, input, out, fmt(format).as_deref())?
        }
        Command::Split {
            input,
            out_dir,
            format,
        } => commands::split(&config, &mut manifest, input, out_dir, fmt(format).as_deref())?,
        Command::Train {
            stage,
            out,
            data,
            init_from,
            format,
        } => commands::train(
            &config,
            &mut manifest,
            stage,
            out,
            data.as_deref(),
            init_from.as_deref(),
            fmt(format).as_deref(),
        )?,
        Command::Predict {
            ckpt,
            input,
            out,
            input_format,
            format,
        } => commands::predict(
            &mut manifest,
            ckpt,
            input,
            out,
            input_format.as_deref(),
            fmt(format).as_deref(),
        )?,
        Command::Ensemble {
            input,
            out,
            members,
            select_top_k,
            dev,
            format,
        } => commands::ensemble(
            &config,
            &mut manifest,
            input,
            out,
            members,
            *select_top_k,
            dev.as_deref(),
            fmt(format).as_deref(),
        )?,
        Command::Evaluate {
            input,
            preds,
            out,
            mode,
            format,
        } => commands::evaluate_cmd(
            &config,
            &mut manifest,
            input,
            preds,
            out,
            mode.as_deref(),
            fmt(format).as_deref(),
        )?,
        Command::Report {
            input,
            out,
            thresholds,
            format,
        } => commands::report(
            &config,
            &mut manifest,
            input,
            out,
            thresholds.as_deref(),
            fmt(format).as_deref(),
        )?,
    }
    manifest.print();
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors (unknown flags, missing arguments) exit 1 with help text.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version as "errors"; keep their exit 0.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    // Log level comes from flags only; the environment is not consulted.
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
