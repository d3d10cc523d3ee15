//! `morpho`: outline morphometrics for bowed string instruments.
//!
//! Subcommands cover the full pipeline: synthetic corpus generation,
//! per-image feature extraction, dataset analytics, year-windowed series,
//! thin-plate-spline epoch morphing and random-forest attribution.
//!
//! Exit codes: 0 on success, 1 when a batch completed with per-instrument
//! failures (recorded in the run manifest), 2 on fatal configuration or
//! I/O errors.

mod commands;
mod config;
mod errors;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::FileConfig;
use crate::errors::CliError;

#[derive(Parser)]
#[command(name = "morpho", version, about = "Instrument outline morphometrics")]
struct Cli {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instrument corpus (images, metadata, truth).
    Synth(SynthArgs),
    /// Extract features from a directory of instrument images.
    Extract(ExtractArgs),
    /// Correlation map and PCA projections from a feature table.
    Analyze(AnalyzeArgs),
    /// Sliding-window evolution of features over fabrication years.
    Timeseries(TimeseriesArgs),
    /// Morph a reference outline toward epoch-average landmarks.
    Morph(MorphArgs),
    /// Random-forest prediction of maker or country from features.
    Classify(ClassifyArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Number of instruments.
    #[arg(long)]
    count: Option<usize>,
    /// Outline noise amplitude as a fraction of the total length.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    year_start: Option<i32>,
    #[arg(long)]
    year_end: Option<i32>,
    /// Period boundaries `baroque,classical,romantic,impressionist`.
    #[arg(long)]
    period_bounds: Option<String>,
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Directory of PGM/PNG images (file stem = instrument id).
    #[arg(short, long)]
    images: Option<PathBuf>,
    /// Metadata CSV `id,maker,country,year`; absent fields stay empty.
    #[arg(short, long)]
    metadata: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Resampled point count per outline.
    #[arg(long)]
    n_resample: Option<usize>,
    /// Gaussian scale (in resampled points) for curvature estimation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Worker threads (capped by MORPHO_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    period_bounds: Option<String>,
    /// Also write per-instrument curvature profiles.
    #[arg(long)]
    dump_curvature: bool,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Feature table produced by `extract`.
    #[arg(short, long)]
    features: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Number of projection components to keep.
    #[arg(long)]
    components: Option<usize>,
    /// Keep the absolute length as an analysis column.
    #[arg(long)]
    include_length: bool,
}

#[derive(Args)]
pub struct TimeseriesArgs {
    #[arg(short, long)]
    features: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Window length in years.
    #[arg(long)]
    dt: Option<i32>,
    /// Window step in years.
    #[arg(long)]
    step: Option<i32>,
    /// Comma-separated features to chart (e.g. `a,h1,smean`).
    #[arg(long)]
    plot: Option<String>,
}

#[derive(Args)]
pub struct MorphArgs {
    #[arg(short, long)]
    features: Option<PathBuf>,
    /// Landmark CSV directory (default: `landmarks` next to the features file).
    #[arg(long)]
    landmarks: Option<PathBuf>,
    /// Contour CSV directory (default: `contours` next to the features file).
    #[arg(long)]
    contours: Option<PathBuf>,
    /// Reference instrument id to morph.
    #[arg(short, long)]
    reference: Option<String>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dt: Option<i32>,
    #[arg(long)]
    step: Option<i32>,
    /// Only render windows nearest these midpoint years (comma-separated).
    #[arg(long)]
    centers: Option<String>,
    #[arg(long)]
    n_resample: Option<usize>,
    /// Vertical deformation-grid lines.
    #[arg(long)]
    grid_nx: Option<usize>,
    /// Horizontal deformation-grid lines.
    #[arg(long)]
    grid_ny: Option<usize>,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[arg(short, long)]
    features: Option<PathBuf>,
    /// Metadata field to predict.
    #[arg(short, long, value_parser = ["maker", "country"])]
    target: Option<String>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    features_per_split: Option<usize>,
    #[arg(long)]
    include_length: bool,
    /// Also train on all labeled rows and save the forest here.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

fn run() -> Result<ExitCode, CliError> {
    let cli = Cli::parse();
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(args) => commands::synth::run(args, &file),
        Command::Extract(args) => commands::extract::run(args, &file),
        Command::Analyze(args) => commands::analyze::run(args, &file),
        Command::Timeseries(args) => commands::timeseries::run(args, &file),
        Command::Morph(args) => commands::morph::run(args, &file),
        Command::Classify(args) => commands::classify::run(args, &file),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error [{}]: {err}", err.kind());
            ExitCode::from(2)
        }
    }
}
