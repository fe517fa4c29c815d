//! `vcount` command-line front end: simulation, tracking, counting,
//! evaluation and benchmarking over the engine in `vcount_core`.

mod commands;
mod error;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;
pub use output::{sha256_hex, Manifest};

#[derive(Debug, Parser)]
#[command(name = "vcount", version, about = "Directional vehicle counting by tracking detections")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags accepted by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for independent runs; never changes the output.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Configuration file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate ground truth and a noisy detection stream.
    Simulate(SimulateArgs),
    /// Link a detection stream into tracks.
    Track(TrackArgs),
    /// Count tracks entering directional zones.
    Count(CountArgs),
    /// Turn automatic and ground-truth counts into a comparison row.
    Evaluate(EvaluateArgs),
    /// Accumulate false negative, false positive and true positive heat maps.
    Heatmap(HeatmapArgs),
    /// Run every stream with every tracker and tabulate count percentages.
    Matrix(MatrixArgs),
    /// Measure tracker throughput.
    Bench(BenchArgs),
    /// Print every default parameter.
    Defaults(DefaultsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FinishRuleArg {
    Or,
    And,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnchorArg {
    Center,
    BottomCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassSourceArg {
    Majority,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeatmapModeArg {
    Footprint,
    Center,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scenario; `--config` supplies a custom one instead.
    #[arg(long)]
    pub preset: Option<String>,
    /// Noise preset replacing the scenario's own (zero, daylight, night, rain).
    #[arg(long)]
    pub noise: Option<String>,
    /// Emit the ground-truth boxes unchanged.
    #[arg(long)]
    pub zero_noise: bool,
}

/// Options shared by commands that run a tracker.
#[derive(Debug, Clone, Args)]
pub struct TrackerOpts {
    /// Tracker kind (iou, kiou, sort, deepsort).
    #[arg(long)]
    pub tracker: Option<String>,
    /// Suppress near-identical boxes before tracking, at this IOU.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.9")]
    pub nms: Option<f64>,
    /// Finish rule for the IOU and KIOU trackers.
    #[arg(long, value_enum)]
    pub finish_rule: Option<FinishRuleArg>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Detection stream (NDJSON).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub tracker: TrackerOpts,
}

/// Options controlling how tracks are counted.
#[derive(Debug, Clone, Args)]
pub struct CountOpts {
    #[arg(long, value_enum)]
    pub anchor: Option<AnchorArg>,
    #[arg(long, value_enum)]
    pub class_source: Option<ClassSourceArg>,
    /// Use predicted boxes of coasting tracks as trajectory points.
    #[arg(long)]
    pub include_predicted: bool,
    /// Count only after the track has entered and left a zone.
    #[arg(long)]
    pub entry_exit: bool,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Tracks file (NDJSON).
    #[arg(long)]
    pub tracks: PathBuf,
    /// Zones file.
    #[arg(long)]
    pub zones: PathBuf,
    #[command(flatten)]
    pub count: CountOpts,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Automatic counts (`direction,class,count`).
    #[arg(long)]
    pub auto: PathBuf,
    /// Ground-truth counts.
    #[arg(long)]
    pub gt: PathBuf,
    /// Model combination label.
    #[arg(long)]
    pub label: String,
    #[arg(long, default_value = "default")]
    pub condition: String,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// Detection stream.
    #[arg(long)]
    pub input: PathBuf,
    /// Ground-truth stream in the detection format.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 1280.0)]
    pub width: f64,
    #[arg(long, default_value_t = 720.0)]
    pub height: f64,
    /// Cell edge in pixels.
    #[arg(long, default_value_t = 32.0)]
    pub cell: f64,
    /// Minimum IOU for a detection to match ground truth.
    #[arg(long, default_value_t = vcount_core::evaluation::DEFAULT_MATCH_IOU)]
    pub iou: f64,
    #[arg(long, value_enum, default_value_t = HeatmapModeArg::Footprint)]
    pub mode: HeatmapModeArg,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub count: CountOpts,
    /// Suppress near-identical boxes before tracking, at this IOU.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.9")]
    pub nms: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Detection stream; a synthetic stream is generated when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Length of the synthetic stream.
    #[arg(long, default_value_t = 20_000)]
    pub frames: u64,
    /// Timed passes over the stream; the best one is reported.
    #[arg(long, default_value_t = 5)]
    pub repeat: u32,
    /// Throughput gate in frames per second.
    #[arg(long, default_value_t = 50_000.0)]
    pub min_fps: f64,
    #[command(flatten)]
    pub tracker: TrackerOpts,
}

#[derive(Debug, Args)]
pub struct DefaultsArgs {
    /// Print the full simulation config of one preset instead.
    #[arg(long)]
    pub preset: Option<String>,
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code: 0 success, 1 validation error, 2 runtime fault.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
