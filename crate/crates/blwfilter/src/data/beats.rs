//! Heartbeat segmentation and dataset splitting.
//!
//! Beats are delimited by consecutive beat annotations (onset to onset).
//! Segments longer than 512 samples are discarded; shorter ones are
//! zero-padded to 512 with the original length recorded, and the padded
//! tail is guaranteed zero. Splitting sends every beat of the 14 held-out
//! records to the test set and shuffles the remainder 70/30 into train and
//! validation.

use crate::data::wfdb::Annotation;
use crate::error::{Error, Result};
use crate::model::BEAT_LEN;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dataset split membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// One segmented heartbeat, zero-padded to 512 samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatSegment {
    /// 512 samples (mV); indices at and beyond `original_length` are zero.
    pub samples: Vec<f64>,
    pub original_length: usize,
    pub record: String,
    pub channel: u16,
    pub beat_index: u32,
    pub split: Split,
}

impl BeatSegment {
    /// Check the padding invariant; used by debug assertions and tests.
    pub fn tail_is_zero(&self) -> bool {
        self.samples[self.original_length..].iter().all(|&v| v == 0.0)
    }
}

/// Annotation codes treated as beat onsets: the standard beat labels
/// (normal and ectopic families). Waveform and rhythm codes never delimit
/// beats.
pub const DEFAULT_BEAT_CODES: [u8; 16] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 34, 35, 38];

/// The held-out test records: every beat of these goes to the test split.
pub const TEST_RECORD_NAMES: [&str; 14] = [
    "sel123", "sel233", "sel302", "sel307", "sel820", "sel853", "sel16420", "sel16795",
    "sele0106", "sele0121", "sel32", "sel49", "sel14046", "sel15814",
];

/// Segment one channel of a record into beats using its annotations.
///
/// Consecutive annotations whose codes appear in `beat_codes` delimit
/// beats; a segment of length L ≤ 512 becomes a `BeatSegment` with
/// `original_length = L`, longer segments are discarded. Annotations must
/// be sorted ascending. Fewer than two boundaries yield no beats. Beats
/// start in the `Train` split; `make_splits` assigns real membership.
pub fn extract_beats(
    signal: &[f64],
    annotations: &[Annotation],
    beat_codes: &[u8],
    record: &str,
    channel: u16,
) -> Vec<BeatSegment> {
    let boundaries: Vec<u64> = annotations
        .iter()
        .filter(|a| beat_codes.contains(&a.code))
        .map(|a| a.sample)
        .collect();
    debug_assert!(boundaries.windows(2).all(|w| w[0] <= w[1]), "annotations unsorted");

    let mut beats = Vec::new();
    let mut beat_index = 0u32;
    for pair in boundaries.windows(2) {
        let (start, end) = (pair[0] as usize, pair[1] as usize);
        let end = end.min(signal.len());
        if start >= end {
            continue;
        }
        let len = end - start;
        if len > BEAT_LEN {
            continue;
        }
        let mut samples = vec![0.0; BEAT_LEN];
        samples[..len].copy_from_slice(&signal[start..end]);
        beats.push(BeatSegment {
            samples,
            original_length: len,
            record: record.to_string(),
            channel,
            beat_index,
            split: Split::Train,
        });
        beat_index += 1;
    }
    beats
}

/// Counts of the split assignment `make_splits` produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Assign splits in place: all beats of `test_records` become test; the
/// rest are shuffled with a seeded generator and divided 70% train / 30%
/// validation. Errors if any named test record contributed no beats.
pub fn make_splits(
    beats: &mut [BeatSegment],
    test_records: &[&str],
    seed: u64,
) -> Result<SplitCounts> {
    let missing: Vec<&str> = test_records
        .iter()
        .filter(|name| !beats.iter().any(|b| b.record == **name))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingRecord(missing.join(", ")));
    }

    let mut rest = Vec::new();
    let mut test = 0usize;
    for (i, b) in beats.iter_mut().enumerate() {
        if test_records.contains(&b.record.as_str()) {
            b.split = Split::Test;
            test += 1;
        } else {
            rest.push(i);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rest.shuffle(&mut rng);
    let train_n = (rest.len() as f64 * 0.7).round() as usize;
    for (k, &i) in rest.iter().enumerate() {
        beats[i].split = if k < train_n { Split::Train } else { Split::Val };
    }
    Ok(SplitCounts {
        train: train_n,
        val: rest.len() - train_n,
        test,
    })
}
