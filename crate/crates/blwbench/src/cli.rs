//! Command-line surface: subcommands, flags, and value enums.
//!
//! Flag values override the config file, which overrides built-in
//! defaults. Everything that affects an output file is echoed into that
//! file's header.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blwfilter::data::beats::Split;
use blwfilter::data::noise::ScaleMode;
use blwfilter::metrics::PrdForm;

#[derive(Debug, Parser)]
#[command(
    name = "blwbench",
    version,
    about = "Benchmark suite for removing baseline wander from ECG beats",
    long_about = "Prepares beat datasets, trains dilated-convolution denoisers, scores them \
                  against classical filters, and renders comparison tables. All commands are \
                  seeded and single-threaded: identical flags produce byte-identical outputs."
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Build a dataset file from WFDB records or the synthetic generator
    Prepare(PrepareArgs),
    /// Train a model and write its best checkpoint and epoch log
    Train(TrainArgs),
    /// Score one method on a dataset split; write per-beat metrics CSV
    Evaluate(EvaluateArgs),
    /// Evaluate several methods and render a comparison table
    Compare(CompareArgs),
    /// Measure single-beat denoising latency
    Time(TimeArgs),
    /// Merge per-beat metric files into a comparison table
    Report(ReportArgs),
}

/// Config-file and seed flags shared by most subcommands.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat key = value config file applied before other flags
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for data preparation, shuffling, and initialization
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum ScaleModeArg {
    /// Match peak absolute amplitudes of beat and noise window
    PeakAbs,
    /// Match peak-to-peak ranges instead
    PeakToPeak,
}

impl From<ScaleModeArg> for ScaleMode {
    fn from(v: ScaleModeArg) -> ScaleMode {
        match v {
            ScaleModeArg::PeakAbs => ScaleMode::PeakAbs,
            ScaleModeArg::PeakToPeak => ScaleMode::PeakToPeak,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum PrdFormArg {
    /// Candidate centered on the reference mean
    Printed,
    /// Reference-centered energy in the denominator
    Conventional,
}

impl From<PrdFormArg> for PrdForm {
    fn from(v: PrdFormArg) -> PrdForm {
        match v {
            PrdFormArg::Printed => PrdForm::Printed,
            PrdFormArg::Conventional => PrdForm::Conventional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum SplitArg {
    Test,
    Val,
    Train,
    All,
}

impl SplitArg {
    pub fn name(self) -> &'static str {
        match self {
            SplitArg::Test => "test",
            SplitArg::Val => "val",
            SplitArg::Train => "train",
            SplitArg::All => "all",
        }
    }

    /// The library split this selects, `None` meaning every pair.
    pub fn split(self) -> Option<Split> {
        match self {
            SplitArg::Test => Some(Split::Test),
            SplitArg::Val => Some(Split::Val),
            SplitArg::Train => Some(Split::Train),
            SplitArg::All => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Output dataset file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Generate a synthetic corpus instead of reading records
    #[arg(long, conflicts_with = "data_dir")]
    pub synthetic: bool,
    /// Directory with .hea/.dat/annotation files
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    /// ECG records to load (comma-separated; default: scan the directory)
    #[arg(long, value_name = "NAMES", value_delimiter = ',')]
    pub record_names: Vec<String>,
    /// Records whose beats form the test split (comma-separated)
    #[arg(long, value_name = "NAMES", value_delimiter = ',')]
    pub test_names: Vec<String>,
    /// Noise record supplying the baseline wander
    #[arg(long, value_name = "NAME")]
    pub noise_record: Option<String>,
    /// Annotation file extension for the ECG records
    #[arg(long, value_name = "EXT")]
    pub annotation_ext: Option<String>,
    /// How noise windows are sized against beats
    #[arg(long, value_enum, default_value = "peak-abs")]
    pub scale_mode: ScaleModeArg,
    /// Synthetic corpus: number of records
    #[arg(long, value_name = "N")]
    pub synth_records: Option<usize>,
    /// Synthetic corpus: beats per record
    #[arg(long, value_name = "N")]
    pub synth_beats: Option<usize>,
    /// Synthetic corpus: leading records held out as the test split
    #[arg(long, value_name = "N")]
    pub synth_test_records: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Model to train: deepfilter, vanilla-l, vanilla-nl, or multibranch
    #[arg(long, value_name = "KIND")]
    pub model: Option<String>,
    /// Dataset file to train on
    #[arg(long, value_name = "FILE")]
    pub dataset: PathBuf,
    /// Output checkpoint file (best validation epoch)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Also write the per-epoch log as CSV
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
    /// Beats per optimizer step
    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,
    /// Learning rate before plateau reductions
    #[arg(long, value_name = "LR")]
    pub initial_lr: Option<f64>,
    /// Weight of the worst-sample loss term
    #[arg(long, value_name = "X")]
    pub lambda: Option<f64>,
    /// Hard epoch ceiling (the plateau schedule usually stops earlier)
    #[arg(long, value_name = "N")]
    pub max_epochs: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Method to score: a model kind, fir, iir, identity, or oracle
    #[arg(long, value_name = "METHOD")]
    pub model: Option<String>,
    /// Checkpoint with trained parameters (model methods only)
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Dataset file to score on
    #[arg(long, value_name = "FILE")]
    pub dataset: PathBuf,
    /// Output per-beat metrics CSV
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Which split to score
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    /// PRD denominator form
    #[arg(long, value_enum)]
    pub prd_form: Option<PrdFormArg>,
    /// Score only the first original_length samples of each beat
    #[arg(long)]
    pub restrict: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dataset file to score on
    #[arg(long, value_name = "FILE")]
    pub dataset: PathBuf,
    /// Methods to compare: name or name=checkpoint, comma-separated
    #[arg(long, value_name = "SPECS", value_delimiter = ',', required = true)]
    pub methods: Vec<String>,
    /// Method the significance tests compare against
    #[arg(long, value_name = "NAME")]
    pub proposed: Option<String>,
    /// Output base path; writes BASE.csv and BASE.md
    #[arg(long, value_name = "BASE")]
    pub out: PathBuf,
    /// Which split to score
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    /// PRD denominator form
    #[arg(long, value_enum)]
    pub prd_form: Option<PrdFormArg>,
    /// Score only the first original_length samples of each beat
    #[arg(long)]
    pub restrict: bool,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Method to time: a model kind, fir, iir, identity, or oracle
    #[arg(long, value_name = "METHOD")]
    pub model: Option<String>,
    /// Checkpoint with trained parameters (model methods only)
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Dataset supplying the timed beat (first test beat); defaults to a
    /// synthetic beat
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Measured repetitions
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub runs: usize,
    /// Unmeasured warm-up repetitions
    #[arg(long, value_name = "N", default_value_t = 10)]
    pub warmup: usize,
    /// Also write the result line to a file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Per-beat metrics CSV files to merge, comma-separated
    #[arg(long, value_name = "FILES", value_delimiter = ',', required = true)]
    pub inputs: Vec<PathBuf>,
    /// Method the significance tests compare against
    #[arg(long, value_name = "NAME")]
    pub proposed: Option<String>,
    /// Output base path; writes BASE.csv and BASE.md
    #[arg(long, value_name = "BASE")]
    pub out: PathBuf,
}
