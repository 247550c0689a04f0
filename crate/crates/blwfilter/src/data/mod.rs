//! Data pipeline: WFDB record parsing, resampling, beat segmentation,
//! split assignment, noise injection, synthetic generation, and the
//! on-disk dataset container.
//!
//! The real-data path reads Physionet-style `.hea`/`.dat`/annotation
//! files, resamples 250 Hz ECG to 360 Hz to match the noise record,
//! segments beats between consecutive beat annotations, and contaminates
//! each beat with a scaled baseline-wander window. The synthetic path
//! produces a structurally identical corpus from generators alone, so the
//! whole benchmark runs without any downloaded data.

pub mod beats;
pub mod dataset;
pub mod noise;
pub mod prepare;
pub mod resample;
pub mod synth;
pub mod wfdb;

pub use beats::{
    extract_beats, make_splits, BeatSegment, Split, SplitCounts, DEFAULT_BEAT_CODES,
    TEST_RECORD_NAMES,
};
pub use dataset::{load_dataset, save_dataset, Dataset};
pub use noise::{
    build_noise_streams, inject_noise, inject_noise_scaled, inject_noise_with, BeatPair,
    NoiseStream, ScaleMode, StreamKind, TEST_RESERVED_FRACTION,
};
pub use prepare::{load_wfdb_record, prepare_dataset, PrepareConfig, WfdbRecord};
pub use resample::{resample_250_to_360, resample_rational};
pub use synth::{
    build_synthetic_corpus, build_synthetic_corpus_with, synth_blw, synth_ecg_beat, SynthBeat,
    SynthBeatParams, SynthCorpusParams,
};
pub use wfdb::{parse_annotations, parse_header, read_samples, Annotation, RecordHeader};
