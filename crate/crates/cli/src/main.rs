//! `reb`: command-line front end for the anomaly-detection engine.
//!
//! Exit codes: 0 success, 1 usage error (bad or missing flag, missing input
//! path), 2 data or format error.

mod commands;
mod files;
mod settings;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::Failure;

#[derive(Debug, Parser)]
#[command(name = "reb", version, about = "Patch-level anomaly detection with local-density KNN")]
struct Cli {
    /// Flat `key = value` file; keys are flag names, flags win over the file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate labeled synthetic-defect images.
    Synth(SynthArgs),
    /// Build a memory bank or learn its local densities.
    #[command(subcommand)]
    Bank(BankCommand),
    /// Subsample a bank by greedy k-center selection.
    Coreset(CoresetArgs),
    /// Score test images against a bank.
    Score(ScoreArgs),
    /// Image- and pixel-level AUROC from score files.
    Eval(EvalArgs),
    /// Throughput sweep over coreset proportions.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory of normal PNG images.
    #[arg(long)]
    input_dir: Option<PathBuf>,
    /// Directory of binary PNG masks named like the images; missing masks mean the whole frame.
    #[arg(long)]
    saliency_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of samples to generate.
    #[arg(long)]
    count: Option<usize>,
    /// Cut-paste fills come from the target image instead of the next image.
    #[arg(long)]
    self_donor: bool,
}

#[derive(Debug, Subcommand)]
enum BankCommand {
    /// Aggregate `<stem>.h2.rebf` / `<stem>.h3.rebf` pairs into a memory bank.
    Build(BankBuildArgs),
    /// Learn local densities (mean distance to the K nearest other entries).
    Density(BankDensityArgs),
}

#[derive(Debug, Args)]
struct BankBuildArgs {
    #[arg(long)]
    features_dir: Option<PathBuf>,
    /// Restrict to label-0 rows of this manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Odd mean-pooling window applied to both hierarchies.
    #[arg(long)]
    pool_window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BankDensityArgs {
    #[arg(long)]
    bank: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CoresetArgs {
    #[arg(long)]
    bank: Option<PathBuf>,
    /// Fraction of entries to keep, in (0, 1].
    #[arg(long)]
    proportion: Option<f64>,
    /// First selected entry.
    #[arg(long)]
    seed_index: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the selected indices, one per line.
    #[arg(long)]
    indices_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    bank: Option<PathBuf>,
    #[arg(long)]
    features_dir: Option<PathBuf>,
    /// Score only the images listed here.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// ldknn, knn, kth-nn, lof or ldof.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    pool_window: Option<usize>,
    /// Score table: image id and image score, tab-separated.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write `<id>.map.rebf` pixel maps here.
    #[arg(long)]
    maps_dir: Option<PathBuf>,
    /// Pixel-map size, `N` or `HxW`.
    #[arg(long)]
    map_size: Option<String>,
    /// Gaussian blur on pixel maps; 0 disables it.
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Score table written by `score`.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Ground-truth manifest; nonzero labels are anomalous.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Pixel maps from `score`; enables pixel AUROC.
    #[arg(long)]
    maps_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    bank: Option<PathBuf>,
    #[arg(long)]
    features_dir: Option<PathBuf>,
    /// Query images; labels, when both classes occur, add image AUROC.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated coreset proportions.
    #[arg(long, value_delimiter = ',')]
    proportions: Option<Vec<f64>>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed_index: Option<usize>,
    #[arg(long)]
    pool_window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run<I, T>(argv: I) -> Result<(), Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    Ok(())
                }
                _ => Err(Failure::Clap(e.to_string())),
            };
        }
    };
    let s = settings::Settings::load(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Synth(a) => commands::synth(&s, a),
        Command::Bank(BankCommand::Build(a)) => commands::bank_build(&s, a),
        Command::Bank(BankCommand::Density(a)) => commands::bank_density(&s, a),
        Command::Coreset(a) => commands::coreset(&s, a),
        Command::Score(a) => commands::score(&s, a),
        Command::Eval(a) => commands::eval(&s, a),
        Command::Bench(a) => commands::bench(&s, a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprint!("{}", f.message());
            ExitCode::from(f.code())
        }
    }
}
