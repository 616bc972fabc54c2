use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ris_core::Month;
use ris_pipeline::{
    error_kind, error_line, run, run_all, Layout, Overrides, PipelineConfig, Stage,
};

/// Monthly inflation scores from social-media posts.
#[derive(Parser)]
#[command(name = "ris", version)]
struct Cli {
    /// Pipeline config file (TOML).
    #[arg(long, short, global = true, default_value = "ris.toml")]
    config: PathBuf,
    /// Directory receiving every artifact.
    #[arg(long, short, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, keyword-filter, bucket and sample the corpus.
    Ingest,
    /// Label the sampled posts with the configured backend.
    Classify,
    /// Build score and baseline series.
    Score,
    /// Correlation and Granger tests against the indicators.
    Validate(ValidateArgs),
    /// Changepoint sensitivity scan and charts.
    Changepoint(FocusArgs),
    /// Bigram TF-IDF shift between two windows.
    Lexshift,
    /// Combined JSON report and summary chart.
    Report(FocusArgs),
    /// Every stage in order.
    RunAll(RunAllArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Use raw monthly scores instead of the moving average.
    #[arg(long, conflicts_with = "smoothed")]
    raw: bool,
    /// Use the moving average regardless of the config.
    #[arg(long)]
    smoothed: bool,
}

#[derive(Args)]
struct FocusArgs {
    /// Report the changepoint nearest to this month (YYYY-MM).
    #[arg(long)]
    focus: Option<Month>,
}

#[derive(Args)]
struct RunAllArgs {
    #[command(flatten)]
    validate: ValidateArgs,
    #[command(flatten)]
    focus: FocusArgs,
}

fn smoothing(v: &ValidateArgs) -> Option<bool> {
    match (v.raw, v.smoothed) {
        (true, _) => Some(false),
        (_, true) => Some(true),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match PipelineConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", error_line(None, &e));
            return ExitCode::from(2);
        }
    };
    let out = Layout::new(&cli.out);
    let (stage, ov) = match &cli.command {
        Command::Ingest => (Some(Stage::Ingest), Overrides::default()),
        Command::Classify => (Some(Stage::Classify), Overrides::default()),
        Command::Score => (Some(Stage::Score), Overrides::default()),
        Command::Validate(v) => (
            Some(Stage::Validate),
            Overrides {
                smoothed: smoothing(v),
                ..Default::default()
            },
        ),
        Command::Changepoint(f) | Command::Report(f) => (
            Some(if matches!(cli.command, Command::Report(_)) {
                Stage::Report
            } else {
                Stage::Changepoint
            }),
            Overrides {
                focus: f.focus,
                ..Default::default()
            },
        ),
        Command::Lexshift => (Some(Stage::Lexshift), Overrides::default()),
        Command::RunAll(a) => (
            None,
            Overrides {
                smoothed: smoothing(&a.validate),
                focus: a.focus.focus,
            },
        ),
    };

    let result = match stage {
        Some(stage) => run(stage, &cfg, &out, ov)
            .map(|v| vec![v])
            .map_err(|e| (stage, e)),
        None => run_all(&cfg, &out, ov),
    };
    match result {
        Ok(summaries) => {
            for s in summaries {
                println!("{s}");
            }
            ExitCode::SUCCESS
        }
        Err((stage, e)) => {
            eprintln!("{}", error_line(Some(stage.name()), &e));
            if error_kind(&e) == "config" {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
