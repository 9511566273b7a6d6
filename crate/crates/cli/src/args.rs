use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sandcast", version, about = "Zone-modular neural-network prediction of sand fraction from seismic attributes")]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic field and write its input files.
    Synth(SynthArgs),
    /// Integrate raw well logs with the attribute volume on a 0.10 ms grid.
    Ingest(IngestArgs),
    /// Train the three zone networks with one well held out.
    Train(TrainArgs),
    /// Train the single-network baseline with one well held out.
    TrainSingle(TrainSingleArgs),
    /// Evaluate a zone-modular model on its blind well against a single network.
    BlindTest(BlindTestArgs),
    /// Compare two trained models on their common blind well.
    Compare(CompareArgs),
    /// Predict sand fraction for every voxel of an attribute volume.
    VolumePredict(VolumePredictArgs),
    /// Smooth a predicted volume inline by inline with a NaN-aware moving average.
    Filter(FilterArgs),
    /// Extract one inline section as a CSV grid or PGM image.
    Section(SectionArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub n_wells: usize,
    #[arg(long, default_value_t = 0.02)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 40)]
    pub inlines: usize,
    #[arg(long, default_value_t = 40)]
    pub xlines: usize,
    /// Samples per trace (2 ms interval).
    #[arg(long, default_value_t = 300)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory holding well_logs.csv, checkshots.csv, locations.csv and attributes.csv.
    #[arg(long)]
    pub data: PathBuf,
    /// Output file (default: <data>/wells_integrated.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = 2000)]
    pub max_epoch: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub err_min: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub blind: String,
    /// `auto`, one size for all zones, or three comma-separated sizes.
    #[arg(long, default_value = "auto")]
    pub hidden: String,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainSingleArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub blind: String,
    /// `auto` or one size.
    #[arg(long, default_value = "auto", conflicts_with = "match_capacity")]
    pub hidden: String,
    /// Use the summed hidden sizes of this zone-modular model.
    #[arg(long)]
    pub match_capacity: Option<PathBuf>,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BlindTestArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Trained single network; trained here with matched capacity when absent.
    #[arg(long)]
    pub single: Option<PathBuf>,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Seed for the baseline (default: the model's seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub single: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VolumePredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Directory holding attributes.csv and horizons.csv.
    #[arg(long, required_unless_present_all = ["volume", "horizons"])]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub volume: Option<PathBuf>,
    #[arg(long)]
    pub horizons: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Pgm,
}

#[derive(Debug, Args)]
pub struct SectionArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub inline: i64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Criteria to run, e.g. `1,3,5` (default: all).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}
