//! `flownav`: point layouts, synthetic recordings, training, evaluation,
//! closed-loop simulation, flow inspection and timing from one binary.

mod commands;
mod config;
mod error;
mod viz;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::CliConfig;

#[derive(Debug, Parser)]
#[command(name = "flownav", version, about = "Optical-flow obstacle detection and navigation toolkit")]
struct Cli {
    /// JSON file with `pipeline`, `script`, `camera` and `closed_loop` sections.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the ring sample-point table.
    GenPoints(GenPointsArgs),
    /// Record the scripted synthetic dataset.
    GenDataset(GenDatasetArgs),
    /// Fit normalization, PCA and the learner on a dataset.
    Train(TrainArgs),
    /// k-fold cross-validation with per-fold confusion matrices.
    Crossval(CrossvalArgs),
    /// Drive a scene autonomously with a trained model.
    Simulate(SimulateArgs),
    /// Track the sample points across consecutive frames and draw the vectors.
    Flow(FlowArgs),
    /// Time the flow, projection and classification stages.
    Bench(BenchArgs),
    /// Precision, recall, F-measure and accuracy from per-fold confusion counts.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct GenPointsArgs {
    #[arg(long)]
    pub rings: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub per_ring: Option<u64>,
    /// Ratio between consecutive ring radii.
    #[arg(long)]
    pub growth: Option<f64>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Dataset CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Recording manifest to write (default: `<out>.manifest.json`).
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Circuit to drive instead of the default square.
    #[arg(long, value_name = "FILE")]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub laps: Option<usize>,
    #[arg(long)]
    pub recordings: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Side of the default square circuit (m).
    #[arg(long)]
    pub side: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerKind {
    Svm,
    Perceptron,
    Svr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Contiguous,
    Grouped,
    Shuffled,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Recording manifest (default: `<data>.manifest.json` when present).
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnerArgs {
    #[arg(long, value_enum)]
    pub learner: Option<LearnerKind>,
    /// Box constraint of the SVM or SVR.
    #[arg(long)]
    pub c: Option<f64>,
    /// RBF width; the default is `1 / (d * var(X))`.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Retained variance ratio of the projection.
    #[arg(long)]
    pub pca: Option<f64>,
    /// Feed raw flow norms to the projection.
    #[arg(long)]
    pub no_normalize: bool,
    /// Weight both classes equally instead of by inverse frequency.
    #[arg(long)]
    pub unbalanced: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    /// Model file to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    /// Reuse the training configuration stored in a model file.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    /// One fold per recording (same as `--strategy grouped`).
    #[arg(long, conflicts_with = "strategy")]
    pub grouped: bool,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Per-fold report CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Scene JSON (default: the three-obstacle staggered circuit).
    #[arg(long, value_name = "FILE")]
    pub scene: Option<PathBuf>,
    /// Start pose `x,y,heading` (default: the staggered circuit start).
    #[arg(long, value_name = "X,Y,HEADING", value_delimiter = ',', num_args = 3, allow_negative_numbers = true)]
    pub start: Option<Vec<f64>>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Perturbs the start pose; 0 perturbs too, it is just another draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trajectory CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Per-tick decision CSV to write.
    #[arg(long, value_name = "FILE")]
    pub decisions: Option<PathBuf>,
    /// Directory for the rendered frames.
    #[arg(long, value_name = "DIR")]
    pub frames: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Two or more frames in order (PGM, PPM, or PNG with the `png` feature).
    #[arg(required = true, num_args = 2.., value_name = "FRAME")]
    pub frames: Vec<PathBuf>,
    /// Directory for `flow_NNNNN.ppm` visualizations.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Vector length multiplier in the drawings.
    #[arg(long, default_value_t = 4.0)]
    pub scale: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Frames to time on; rendered from the staggered circuit when absent.
    #[arg(long, num_args = 2.., value_name = "FRAME")]
    pub frames: Option<Vec<PathBuf>>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    /// Camera frame rate for the capture-adjusted figure.
    #[arg(long, default_value_t = 25.28)]
    pub capture_fps: f64,
    /// Timing table CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// CSV with `fold,tp,fp,tn,fn` columns.
    #[arg(value_name = "CONFUSION_CSV")]
    pub confusion: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = CliConfig::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::GenPoints(a) => commands::gen_points(&cfg, &a),
        Command::GenDataset(a) => commands::gen_dataset(&cfg, &a),
        Command::Train(a) => commands::train(&cfg, &a),
        Command::Crossval(a) => commands::crossval(&cfg, &a),
        Command::Simulate(a) => commands::simulate(&cfg, &a),
        Command::Flow(a) => commands::flow(&cfg, &a),
        Command::Bench(a) => commands::bench(&cfg, &a),
        Command::Metrics(a) => commands::metrics(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
