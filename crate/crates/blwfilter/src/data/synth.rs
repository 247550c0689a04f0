//! Synthetic ECG corpus for self-contained benchmarking.
//!
//! Beats are sums of five Gaussian bumps shaped like the P, Q, R, S, and T
//! waves, with the R peak dominant; baseline wander is a handful of slow
//! sinusoids plus a linear drift, all of whose energy sits well below 5 Hz.
//! `build_synthetic_corpus` assembles a full dataset: 105 records of 20
//! beats each, the first 14 records held out as the test split, and noise
//! injected from two synthetic wander channels through the same
//! reservation scheme used for a real noise record.

use crate::data::beats::{make_splits, BeatSegment, Split};
use crate::data::dataset::Dataset;
use crate::data::noise::{build_noise_streams, inject_noise};
use crate::error::Result;
use crate::model::BEAT_LEN;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Shape controls for one synthetic beat.
#[derive(Debug, Clone, Copy)]
pub struct SynthBeatParams {
    /// Shortest beat, in samples at 360 Hz.
    pub min_len: usize,
    /// Longest beat, in samples at 360 Hz. Must stay within one window.
    pub max_len: usize,
    /// R-peak amplitude range, arbitrary units.
    pub r_amp_low: f64,
    pub r_amp_high: f64,
}

impl Default for SynthBeatParams {
    fn default() -> Self {
        SynthBeatParams {
            min_len: 280,
            max_len: 460,
            r_amp_low: 0.8,
            r_amp_high: 1.2,
        }
    }
}

/// One synthetic beat along with the R amplitude it was built around.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthBeat {
    pub samples: Vec<f64>,
    pub r_amplitude: f64,
}

/// Generate one beat: 5 Gaussian bumps (P, Q, R, S, T) over a random
/// length, centered so the narrow R bump is the global extremum.
pub fn synth_ecg_beat<R: Rng>(rng: &mut R, params: &SynthBeatParams) -> SynthBeat {
    debug_assert!(params.min_len >= 2 && params.max_len >= params.min_len);
    let len = rng.gen_range(params.min_len..=params.max_len);
    let a_r = rng.gen_range(params.r_amp_low..=params.r_amp_high);
    let l = len as f64;

    // (center fraction, amplitude relative to R, width fraction). The small
    // jitters keep beats distinct without letting any bump rival R.
    let p_amp = rng.gen_range(0.12..=0.18);
    let t_amp = rng.gen_range(0.25..=0.35);
    let q_amp = -rng.gen_range(0.08..=0.12);
    let s_amp = -rng.gen_range(0.12..=0.18);
    let p_c = 0.22 + rng.gen_range(-0.01..=0.01);
    let t_c = 0.65 + rng.gen_range(-0.02..=0.02);
    let bumps: [(f64, f64, f64); 5] = [
        (p_c, p_amp, 0.025),
        (0.375, q_amp, 0.010),
        (0.40, 1.0, 0.012),
        (0.43, s_amp, 0.012),
        (t_c, t_amp, 0.055),
    ];

    let mut samples = vec![0.0; len];
    for &(c, amp, w) in &bumps {
        let center = c * l;
        let sigma = w * l;
        for (i, s) in samples.iter_mut().enumerate() {
            let d = (i as f64 - center) / sigma;
            *s += a_r * amp * (-0.5 * d * d).exp();
        }
    }
    SynthBeat {
        samples,
        r_amplitude: a_r,
    }
}

/// Lowest and highest wander component frequencies, Hz.
pub const BLW_FREQ_LOW_HZ: f64 = 0.05;
pub const BLW_FREQ_HIGH_HZ: f64 = 3.0;

/// Sampling rate the synthetic corpus is generated at.
pub const SYNTH_FS_HZ: f64 = 360.0;

/// Generate a baseline-wander channel: 3 to 6 sinusoids with log-uniform
/// frequencies in [0.05, 3] Hz plus a slow linear drift.
pub fn synth_blw<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let n_components = rng.gen_range(3..=6usize);
    let mut components = Vec::with_capacity(n_components);
    for _ in 0..n_components {
        let log_f = rng.gen_range(BLW_FREQ_LOW_HZ.ln()..=BLW_FREQ_HIGH_HZ.ln());
        let freq = log_f.exp();
        let amp = rng.gen_range(0.2..=1.0);
        let phase = rng.gen_range(0.0..2.0 * PI);
        components.push((freq, amp, phase));
    }
    let drift = rng.gen_range(-1.0..=1.0);
    let mut out = vec![0.0; len];
    for (i, o) in out.iter_mut().enumerate() {
        let t = i as f64 / SYNTH_FS_HZ;
        let mut v = drift * (i as f64 / len.max(2) as f64 - 0.5);
        for &(freq, amp, phase) in &components {
            v += amp * (2.0 * PI * freq * t + phase).sin();
        }
        *o = v;
    }
    out
}

/// Records in the standard synthetic corpus.
pub const SYNTH_RECORD_COUNT: usize = 105;
/// Beats generated per synthetic record.
pub const SYNTH_BEATS_PER_RECORD: usize = 20;
/// Synthetic records held out as the test split (by position: the first
/// `SYNTH_TEST_RECORDS` names).
pub const SYNTH_TEST_RECORDS: usize = 14;
/// Length of each synthetic noise channel, in samples.
pub const SYNTH_NOISE_LEN: usize = 200_000;

/// Corpus dimensions; the default mirrors the real-data benchmark scale.
#[derive(Debug, Clone, Copy)]
pub struct SynthCorpusParams {
    pub records: usize,
    pub beats_per_record: usize,
    /// How many of the first record names form the test split.
    pub test_records: usize,
    /// Length of each of the two synthetic noise channels.
    pub noise_len: usize,
}

impl Default for SynthCorpusParams {
    fn default() -> Self {
        SynthCorpusParams {
            records: SYNTH_RECORD_COUNT,
            beats_per_record: SYNTH_BEATS_PER_RECORD,
            test_records: SYNTH_TEST_RECORDS,
            noise_len: SYNTH_NOISE_LEN,
        }
    }
}

/// Name of the `i`th synthetic record, `synth000` through `synth104`.
pub fn synth_record_name(i: usize) -> String {
    format!("synth{i:03}")
}

/// Build a synthetic dataset of the given dimensions from one seed.
///
/// Deterministic: beats, splits, noise channels, and injections all derive
/// from `seed`. Test beats draw noise from the test-reserved stream and
/// train/validation beats from the train/validation stream, mirroring the
/// protocol used with a real noise record.
pub fn build_synthetic_corpus_with(seed: u64, corpus: &SynthCorpusParams) -> Result<Dataset> {
    if corpus.records == 0 || corpus.beats_per_record == 0 {
        return Err(crate::error::Error::Config(
            "synthetic corpus needs at least one record and one beat".into(),
        ));
    }
    if corpus.test_records > corpus.records {
        return Err(crate::error::Error::Config(format!(
            "cannot hold out {} test records from a corpus of {}",
            corpus.test_records, corpus.records
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = SynthBeatParams::default();

    let mut beats = Vec::with_capacity(corpus.records * corpus.beats_per_record);
    for r in 0..corpus.records {
        let record = synth_record_name(r);
        for b in 0..corpus.beats_per_record {
            let beat = synth_ecg_beat(&mut rng, &params);
            let original_length = beat.samples.len();
            debug_assert!(original_length <= BEAT_LEN);
            let mut samples = vec![0.0; BEAT_LEN];
            samples[..original_length].copy_from_slice(&beat.samples);
            beats.push(BeatSegment {
                samples,
                original_length,
                record: record.clone(),
                channel: 0,
                beat_index: b as u32,
                split: Split::Train,
            });
        }
    }

    let test_names: Vec<String> = (0..corpus.test_records).map(synth_record_name).collect();
    let test_refs: Vec<&str> = test_names.iter().map(|s| s.as_str()).collect();
    make_splits(&mut beats, &test_refs, seed)?;

    let channels = vec![
        synth_blw(&mut rng, corpus.noise_len),
        synth_blw(&mut rng, corpus.noise_len),
    ];
    let (mut test_stream, mut trainval_stream) = build_noise_streams(&channels)?;

    let pairs = beats
        .iter()
        .map(|beat| {
            let stream = if beat.split == Split::Test {
                &mut test_stream
            } else {
                &mut trainval_stream
            };
            inject_noise(beat, stream, &mut rng)
        })
        .collect();
    Ok(Dataset { seed, pairs })
}

/// Build the standard-size synthetic dataset (105 records × 20 beats, first
/// 14 records held out for test).
pub fn build_synthetic_corpus(seed: u64) -> Result<Dataset> {
    build_synthetic_corpus_with(seed, &SynthCorpusParams::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;
    use rustfft::FftPlanner;

    #[test]
    fn beat_length_and_peak_follow_the_recipe() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = SynthBeatParams::default();
        for _ in 0..50 {
            let beat = synth_ecg_beat(&mut rng, &params);
            assert!((280..=460).contains(&beat.samples.len()));
            let peak = beat.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // The R bump dominates: global extremum within 5% of its
            // amplitude (neighbors subtract a little, nothing adds much).
            assert!(
                (peak - beat.r_amplitude).abs() <= 0.05 * beat.r_amplitude,
                "peak {peak} vs R {r}",
                r = beat.r_amplitude
            );
        }
    }

    #[test]
    fn beat_has_all_five_waves() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let beat = synth_ecg_beat(&mut rng, &SynthBeatParams::default());
            let n = beat.samples.len() as f64;
            let window = |lo: f64, hi: f64| {
                &beat.samples[(lo * n) as usize..(hi * n) as usize]
            };
            let max = |s: &[f64]| s.iter().fold(f64::MIN, |m, &v| m.max(v));
            let min = |s: &[f64]| s.iter().fold(f64::MAX, |m, &v| m.min(v));
            assert!(max(window(0.18, 0.26)) > 0.05, "P bump present");
            assert!(min(window(0.33, 0.39)) < -0.01, "Q dip present");
            assert!(
                max(window(0.38, 0.42)) > 0.9 * beat.r_amplitude,
                "R peak present"
            );
            assert!(min(window(0.41, 0.47)) < -0.05, "S dip present");
            assert!(max(window(0.58, 0.72)) > 0.15, "T bump present");
        }
    }

    #[test]
    fn wander_energy_sits_below_five_hz() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 65_536usize;
        for _ in 0..3 {
            let x = synth_blw(&mut rng, n);
            let mut buf: Vec<Complex64> =
                x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            FftPlanner::new().plan_fft_forward(n).process(&mut buf);
            let bin_hz = SYNTH_FS_HZ / n as f64;
            let mut total = 0.0;
            let mut high = 0.0;
            for (k, c) in buf.iter().enumerate().take(n / 2 + 1) {
                let e = c.norm_sqr();
                total += e;
                if k as f64 * bin_hz > 5.0 {
                    high += e;
                }
            }
            assert!(high < 0.01 * total, "high-band fraction {}", high / total);
        }
    }

    #[test]
    fn wander_varies_with_seed() {
        let a = synth_blw(&mut ChaCha8Rng::seed_from_u64(1), 1000);
        let b = synth_blw(&mut ChaCha8Rng::seed_from_u64(2), 1000);
        assert_ne!(a, b);
    }

    #[test]
    fn corpus_has_documented_shape() {
        let ds = build_synthetic_corpus(42).unwrap();
        assert_eq!(ds.pairs.len(), 2100);
        let test = ds
            .pairs
            .iter()
            .filter(|p| p.clean.split == Split::Test)
            .count();
        let train = ds
            .pairs
            .iter()
            .filter(|p| p.clean.split == Split::Train)
            .count();
        let val = ds
            .pairs
            .iter()
            .filter(|p| p.clean.split == Split::Val)
            .count();
        assert_eq!(test, SYNTH_TEST_RECORDS * SYNTH_BEATS_PER_RECORD);
        assert_eq!(train, 1274); // 70% of 1820, rounded
        assert_eq!(val, 546);
        // All test beats come from the first 14 records.
        for p in ds.pairs.iter().filter(|p| p.clean.split == Split::Test) {
            let idx: usize = p.clean.record[5..].parse().unwrap();
            assert!(idx < SYNTH_TEST_RECORDS);
        }
    }

    #[test]
    fn corpus_is_seed_deterministic() {
        let a = build_synthetic_corpus(9).unwrap();
        let b = build_synthetic_corpus(9).unwrap();
        assert_eq!(a.pairs, b.pairs);
        let c = build_synthetic_corpus(10).unwrap();
        assert_ne!(a.pairs, c.pairs);
    }

    #[test]
    fn corpus_noise_is_nontrivial() {
        let ds = build_synthetic_corpus(4).unwrap();
        let mut max_dev = 0.0f64;
        for p in &ds.pairs {
            for i in 0..p.clean.original_length {
                max_dev = max_dev.max((p.noisy[i] - p.clean.samples[i]).abs());
            }
            // Tail stays clean.
            for i in p.clean.original_length..p.noisy.len() {
                assert_eq!(p.noisy[i], 0.0);
            }
        }
        assert!(max_dev > 0.1);
    }
}
