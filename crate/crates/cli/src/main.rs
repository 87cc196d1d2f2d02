use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaitlock::background::Technique;
use gaitlock::svm::KernelKind;
use gaitlock::threshold::Threshold;

mod commands;

/// Gait recognition from side-view silhouette sequences.
#[derive(Debug, Parser)]
#[command(name = "gaitlock", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Pipeline configuration file (`key = value`, `#` comments).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for the train/test split, the solver and the synthetic walker.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Reuse stage outputs already present in the output directory.
    #[arg(long, global = true)]
    resume: bool,
    /// Only print results, no progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a background frame from a frame directory.
    Background {
        #[arg(long, default_value_t = Technique::Median)]
        technique: Technique,
        /// Change threshold for cdm.
        #[arg(long, default_value_t = Threshold::Auto)]
        threshold: Threshold,
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_name = "BG.pgm")]
        out: PathBuf,
    },
    /// Write one 0/255 silhouette per frame.
    Segment {
        #[arg(long, value_name = "BG.pgm")]
        bg: PathBuf,
        #[arg(long, default_value_t = Threshold::Auto)]
        threshold: Threshold,
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Print the gait period, cycle boundaries and width signal of a silhouette directory.
    Cycles {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long, default_value_t = 25.0)]
        fps: f64,
    },
    /// Extract the 14 features of a silhouette directory into a one-row CSV.
    Features {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long, default_value_t = 25.0)]
        fps: f64,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// Defaults to the name of the directory above `--in`.
        #[arg(long)]
        subject: Option<String>,
        /// Defaults to the name of `--in`.
        #[arg(long)]
        sequence: Option<String>,
    },
    /// Train a multi-class SVM on a feature CSV, using subject_id as the label.
    Train {
        #[arg(long, value_name = "CSV")]
        features: PathBuf,
        #[arg(long, default_value_t = KernelKind::Rbf)]
        kernel: KernelKind,
        #[arg(long, default_value_t = 10.0)]
        c: f64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        #[arg(long, value_name = "MODEL")]
        out: PathBuf,
    },
    /// Print the predicted subject of every row of a feature CSV.
    Predict {
        #[arg(long, value_name = "MODEL")]
        model: PathBuf,
        #[arg(long, value_name = "CSV")]
        features: PathBuf,
    },
    /// Confusion matrix and measures against a `subject_id,sequence_id,label` CSV.
    Evaluate {
        #[arg(long, value_name = "MODEL")]
        model: PathBuf,
        #[arg(long, value_name = "CSV")]
        features: PathBuf,
        #[arg(long, value_name = "CSV")]
        labels: PathBuf,
    },
    /// Render a synthetic walker sequence plus truth.csv.
    Synth {
        /// Walker config file; `--config` is used when omitted.
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Features, training, evaluation and gallery in one run.
    Pipeline(RunArgs),
    /// Accuracy of each feature-set combination.
    Ablation(RunArgs),
    /// Best accuracy per kernel over the hyperparameter grid.
    KernelSweep(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Dataset root (`<subject>/<sequence>/frame_NNNN.pgm`); overrides the config.
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| commands::run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("gaitlock: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(commands::EXIT_INTERNAL),
    }
}
