//! End-to-end dataset assembly from WFDB files on disk.
//!
//! Loads each ECG record, resamples 250 Hz signals to 360 Hz (rescaling
//! annotation indices by the same 36/25 ratio), segments beats on both
//! channels, assigns splits, then contaminates every beat from the noise
//! record's two streams: test beats from the reserved stream, train and
//! validation beats from the remainder.

use std::fs;
use std::path::{Path, PathBuf};

use crate::data::beats::{extract_beats, make_splits, BeatSegment, Split, TEST_RECORD_NAMES};
use crate::data::dataset::Dataset;
use crate::data::noise::{build_noise_streams, inject_noise_with, ScaleMode};
use crate::data::resample::{resample_250_to_360, DOWN, UP};
use crate::data::wfdb::{parse_annotations, parse_header, read_samples, Annotation, RecordHeader};
use crate::error::{Error, Result};
use rand::SeedableRng;

/// One fully loaded WFDB record: parsed header, per-channel physical
/// samples, and its annotation list.
#[derive(Debug, Clone)]
pub struct WfdbRecord {
    pub header: RecordHeader,
    pub channels: Vec<Vec<f64>>,
    pub annotations: Vec<Annotation>,
}

/// Read `<dir>/<name>.hea`, its signal file, and `<dir>/<name>.<ann_ext>`.
///
/// Multi-file signals are out of scope: every channel must name the same
/// signal file. Pass an empty `ann_ext` to skip annotations (noise records
/// have none).
pub fn load_wfdb_record(dir: &Path, name: &str, ann_ext: &str) -> Result<WfdbRecord> {
    let hea_path = dir.join(format!("{name}.hea"));
    let text = fs::read_to_string(&hea_path).map_err(|e| Error::io(&hea_path, e))?;
    let header = parse_header(&text)?;
    let file_name = &header.channels[0].file_name;
    if header.channels.iter().any(|c| &c.file_name != file_name) {
        return Err(Error::Format {
            format: "hea",
            detail: format!("record {name}: channels live in different signal files"),
        });
    }
    let dat_path = dir.join(file_name);
    let bytes = fs::read(&dat_path).map_err(|e| Error::io(&dat_path, e))?;
    let channels = read_samples(&header, &bytes)?;
    let annotations = if ann_ext.is_empty() {
        Vec::new()
    } else {
        let ann_path = dir.join(format!("{name}.{ann_ext}"));
        let bytes = fs::read(&ann_path).map_err(|e| Error::io(&ann_path, e))?;
        parse_annotations(&bytes)?
    };
    Ok(WfdbRecord {
        header,
        channels,
        annotations,
    })
}

/// Map a 250 Hz annotation index into the 360 Hz domain: round(i · 36/25).
pub fn rescale_annotation_index(sample: u64) -> u64 {
    (sample * UP as u64 + DOWN as u64 / 2) / DOWN as u64
}

/// Everything `prepare_dataset` needs to find and shape the data.
#[derive(Debug, Clone)]
pub struct PrepareConfig {
    /// Directory holding all `.hea`, signal, and annotation files.
    pub data_dir: PathBuf,
    /// ECG records to load; empty means every `.hea` in the directory
    /// except the noise record, sorted by name.
    pub record_names: Vec<String>,
    /// Noise record name (its channels supply the wander).
    pub noise_record: String,
    /// Annotation file extension for the ECG records.
    pub annotation_ext: String,
    /// Annotation codes that delimit beats.
    pub beat_codes: Vec<u8>,
    /// Records whose beats form the test split.
    pub test_records: Vec<String>,
    /// Seed for split shuffling and noise amplitudes.
    pub seed: u64,
    /// How noise windows are sized against beats.
    pub scale_mode: ScaleMode,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig {
            data_dir: PathBuf::from("."),
            record_names: Vec::new(),
            noise_record: "em".to_string(),
            annotation_ext: "atr".to_string(),
            beat_codes: crate::data::beats::DEFAULT_BEAT_CODES.to_vec(),
            test_records: TEST_RECORD_NAMES.iter().map(|s| s.to_string()).collect(),
            seed: 42,
            scale_mode: ScaleMode::PeakAbs,
        }
    }
}

fn scan_record_names(dir: &Path, skip: &str) -> Result<Vec<String>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("hea") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                if stem != skip {
                    names.push(stem.to_string());
                }
            }
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(Error::Config(format!(
            "no .hea records found in {}",
            dir.display()
        )));
    }
    Ok(names)
}

/// Segment one loaded record into beats, resampling 250 Hz data (and its
/// annotation indices) to 360 Hz first. Both channels contribute beats.
pub fn record_to_beats(record: &WfdbRecord, beat_codes: &[u8]) -> Result<Vec<BeatSegment>> {
    let fs = record.header.fs_hz;
    let (channels, annotations): (Vec<Vec<f64>>, Vec<Annotation>) = if (fs - 250.0).abs() < 1e-9 {
        let channels = record
            .channels
            .iter()
            .map(|c| resample_250_to_360(c))
            .collect();
        let annotations = record
            .annotations
            .iter()
            .map(|a| Annotation {
                sample: rescale_annotation_index(a.sample),
                code: a.code,
            })
            .collect();
        (channels, annotations)
    } else if (fs - 360.0).abs() < 1e-9 {
        (record.channels.clone(), record.annotations.clone())
    } else {
        return Err(Error::Config(format!(
            "record {}: unsupported sampling rate {fs} Hz (need 250 or 360)",
            record.header.record
        )));
    };

    let mut beats = Vec::new();
    for (ch, samples) in channels.iter().enumerate() {
        beats.extend(extract_beats(
            samples,
            &annotations,
            beat_codes,
            &record.header.record,
            ch as u16,
        ));
    }
    Ok(beats)
}

/// Assemble the full dataset: load, resample, segment, split, contaminate.
///
/// Deterministic for a fixed config: records are processed in sorted name
/// order and the noise cursor advances sequentially, so the same seed
/// yields a byte-identical dataset.
pub fn prepare_dataset(config: &PrepareConfig) -> Result<Dataset> {
    let names = if config.record_names.is_empty() {
        scan_record_names(&config.data_dir, &config.noise_record)?
    } else {
        config.record_names.clone()
    };

    let mut beats = Vec::new();
    for name in &names {
        let record = load_wfdb_record(&config.data_dir, name, &config.annotation_ext)?;
        beats.extend(record_to_beats(&record, &config.beat_codes)?);
    }

    let test_refs: Vec<&str> = config.test_records.iter().map(|s| s.as_str()).collect();
    make_splits(&mut beats, &test_refs, config.seed)?;

    let noise = load_wfdb_record(&config.data_dir, &config.noise_record, "")?;
    if (noise.header.fs_hz - 360.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "noise record {} is sampled at {} Hz, need 360",
            config.noise_record, noise.header.fs_hz
        )));
    }
    let (mut test_stream, mut trainval_stream) = build_noise_streams(&noise.channels)?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let pairs = beats
        .iter()
        .map(|beat| {
            let stream = if beat.split == Split::Test {
                &mut test_stream
            } else {
                &mut trainval_stream
            };
            inject_noise_with(beat, stream, &mut rng, config.scale_mode)
        })
        .collect();
    Ok(Dataset {
        seed: config.seed,
        pairs,
    })
}
