//! Baseline-wander noise handling: reserving a test-only slice of the
//! noise record, streaming 512-sample windows, and injecting scaled noise
//! into clean beats.
//!
//! The first 13% of each noise channel is reserved for contaminating test
//! beats (channel 1's reservation followed by channel 2's); the remainders
//! are concatenated the same way for train/validation use. Windows are
//! consumed sequentially with wrap-around, and each injection scales its
//! window so the window's peak equals α times the beat's peak, with
//! α drawn uniformly from [0.2, 2.0].

use crate::data::beats::BeatSegment;
use crate::error::{Error, Result};
use rand::Rng;

/// Which part of the noise record a stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    TestReserved,
    TrainVal,
}

/// A sequential window source over concatenated noise samples.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    samples: Vec<f64>,
    cursor: usize,
    pub kind: StreamKind,
}

impl NoiseStream {
    pub fn new(samples: Vec<f64>, kind: StreamKind) -> Self {
        NoiseStream {
            samples,
            cursor: 0,
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Copy the next `n` samples, wrapping to the start when the end is
    /// reached. The cursor advances by exactly `n`.
    pub fn next_window(&mut self, n: usize) -> Vec<f64> {
        assert!(!self.samples.is_empty(), "noise stream is empty");
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.samples[self.cursor]);
            self.cursor = (self.cursor + 1) % self.samples.len();
        }
        out
    }
}

/// Fraction of each noise channel reserved for the test split.
pub const TEST_RESERVED_FRACTION: f64 = 0.13;

/// Split the noise record's channels into the test-reserved stream and the
/// train/validation stream.
///
/// The first `floor(0.13 · len)` samples of every channel feed the test
/// stream; the remainders feed the train/validation stream; both
/// concatenate channels in order. At least two channels are required.
pub fn build_noise_streams(channels: &[Vec<f64>]) -> Result<(NoiseStream, NoiseStream)> {
    if channels.len() < 2 {
        return Err(Error::Config(format!(
            "noise record must have at least 2 channels, got {}",
            channels.len()
        )));
    }
    let mut test = Vec::new();
    let mut trainval = Vec::new();
    for ch in channels {
        let reserved = (ch.len() as f64 * TEST_RESERVED_FRACTION).floor() as usize;
        test.extend_from_slice(&ch[..reserved]);
    }
    for ch in channels {
        let reserved = (ch.len() as f64 * TEST_RESERVED_FRACTION).floor() as usize;
        trainval.extend_from_slice(&ch[reserved..]);
    }
    Ok((
        NoiseStream::new(test, StreamKind::TestReserved),
        NoiseStream::new(trainval, StreamKind::TrainVal),
    ))
}

/// A clean beat paired with its noise-contaminated version.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatPair {
    pub clean: BeatSegment,
    /// Same length as `clean.samples`; equals clean plus scaled noise over
    /// the original length, with the padded tail untouched (zero).
    pub noisy: Vec<f64>,
    /// Noise amplitude factor drawn from [0.2, 2.0].
    pub alpha: f64,
    /// True when the beat peak was zero, making the injected noise zero.
    pub degenerate: bool,
}

/// How the noise window is sized against the beat before applying α.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    /// Match the window's peak absolute value to α times the beat's.
    #[default]
    PeakAbs,
    /// Match the window's peak-to-peak range to α times the beat's.
    PeakToPeak,
}

fn amplitude(samples: &[f64], mode: ScaleMode) -> f64 {
    match mode {
        ScaleMode::PeakAbs => samples.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        ScaleMode::PeakToPeak => {
            let max = samples.iter().fold(f64::MIN, |m, &v| m.max(v));
            let min = samples.iter().fold(f64::MAX, |m, &v| m.min(v));
            max - min
        }
    }
}

/// Deterministic injection core with an explicit α (the `rng`-driven entry
/// points draw α from [0.2, 2.0] and delegate here; α = 0 reproduces the
/// clean beat exactly, which tests rely on).
///
/// Takes the next window from the stream, scales it so its amplitude (per
/// `mode`, measured over the portion that lands on real samples) equals
/// `α ·` the beat's amplitude, and adds it over the beat's original length
/// only. A zero-amplitude beat yields zero noise and is flagged degenerate.
pub fn inject_noise_scaled(
    beat: &BeatSegment,
    stream: &mut NoiseStream,
    alpha: f64,
    mode: ScaleMode,
) -> BeatPair {
    debug_assert!(beat.original_length >= 1 && beat.original_length <= beat.samples.len());
    let window = stream.next_window(beat.samples.len());
    let beat_amp = amplitude(&beat.samples[..beat.original_length], mode);
    let window_amp = amplitude(&window[..beat.original_length], mode);
    let scale = if window_amp > 0.0 {
        alpha * beat_amp / window_amp
    } else {
        0.0
    };
    let mut noisy = beat.samples.clone();
    for i in 0..beat.original_length {
        noisy[i] += scale * window[i];
    }
    BeatPair {
        clean: beat.clone(),
        noisy,
        alpha,
        degenerate: beat_amp == 0.0,
    }
}

/// Inject one window of noise with α ~ U[0.2, 2.0] and a chosen scale mode.
pub fn inject_noise_with<R: Rng>(
    beat: &BeatSegment,
    stream: &mut NoiseStream,
    rng: &mut R,
    mode: ScaleMode,
) -> BeatPair {
    let alpha = rng.gen_range(0.2..=2.0);
    inject_noise_scaled(beat, stream, alpha, mode)
}

/// Inject one window of noise with α ~ U[0.2, 2.0], peak-absolute scaling.
pub fn inject_noise<R: Rng>(beat: &BeatSegment, stream: &mut NoiseStream, rng: &mut R) -> BeatPair {
    inject_noise_with(beat, stream, rng, ScaleMode::PeakAbs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::beats::Split;
    use crate::model::BEAT_LEN;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn beat_with(samples: Vec<f64>, original_length: usize) -> BeatSegment {
        let mut s = vec![0.0; BEAT_LEN];
        s[..samples.len()].copy_from_slice(&samples);
        BeatSegment {
            samples: s,
            original_length,
            record: "r".into(),
            channel: 0,
            beat_index: 0,
            split: Split::Train,
        }
    }

    #[test]
    fn thirteen_percent_reservation_arithmetic() {
        let ch = vec![vec![1.0; 1000], vec![2.0; 1000]];
        let (test, trainval) = build_noise_streams(&ch).unwrap();
        assert_eq!(test.len(), 260);
        assert_eq!(trainval.len(), 1740);
    }

    #[test]
    fn streams_are_disjoint_source_ranges() {
        // Tag each source sample with a unique value and check no value
        // appears in both streams.
        let ch: Vec<Vec<f64>> = vec![
            (0..1000).map(|i| i as f64).collect(),
            (1000..2000).map(|i| i as f64).collect(),
        ];
        let (mut test, mut trainval) = build_noise_streams(&ch).unwrap();
        let t = test.next_window(test.len());
        let v = trainval.next_window(trainval.len());
        let tset: std::collections::HashSet<u64> = t.iter().map(|x| x.to_bits()).collect();
        assert!(v.iter().all(|x| !tset.contains(&x.to_bits())));
        assert_eq!(t.len() + v.len(), 2000);
    }

    #[test]
    fn channels_concatenate_in_order() {
        let ch = vec![vec![1.0; 100], vec![2.0; 100]];
        let (mut test, _) = build_noise_streams(&ch).unwrap();
        let w = test.next_window(26);
        assert!(w[..13].iter().all(|&v| v == 1.0));
        assert!(w[13..].iter().all(|&v| v == 2.0));
    }

    #[test]
    fn single_channel_is_rejected() {
        assert!(build_noise_streams(&[vec![1.0; 10]]).is_err());
    }

    #[test]
    fn windows_wrap_around() {
        let mut s = NoiseStream::new(vec![1.0, 2.0, 3.0], StreamKind::TrainVal);
        let w = s.next_window(7);
        assert_eq!(w, vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0]);
        assert_eq!(s.next_window(1), vec![2.0]);
    }

    #[test]
    fn documented_scaling_example() {
        // Beat peak 1.0, window peak 2.0, α = 0.5 → window × 0.25. Drive α
        // by searching a seed region: instead, test scale arithmetic by
        // reconstructing α from the output.
        let beat = beat_with(vec![1.0, 0.5, -0.25, 0.0], 4);
        let mut stream = NoiseStream::new(vec![2.0, -1.0, 0.5, 1.0], StreamKind::TrainVal);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pair = inject_noise(&beat, &mut stream, &mut rng);
        // noisy − clean = scale · window; recover scale from sample 0.
        let scale = (pair.noisy[0] - pair.clean.samples[0]) / 2.0;
        assert!((scale - pair.alpha * 1.0 / 2.0).abs() < 1e-12);
        assert!((0.2..=2.0).contains(&pair.alpha));
        // Window peak after scaling equals α · beat peak.
        let scaled_peak = 2.0 * scale.abs();
        assert!((scaled_peak - pair.alpha * 1.0).abs() < 1e-12);
    }

    #[test]
    fn padded_tail_stays_zero() {
        let beat = beat_with(vec![1.0; 100], 100);
        let mut stream = NoiseStream::new(vec![0.7; 4096], StreamKind::TrainVal);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pair = inject_noise(&beat, &mut stream, &mut rng);
        assert!(pair.noisy[100..].iter().all(|&v| v == 0.0));
        assert!(pair.noisy[..100].iter().all(|&v| v != 1.0));
    }

    #[test]
    fn zero_beat_is_degenerate_and_unchanged() {
        let beat = beat_with(vec![0.0; 10], 10);
        let mut stream = NoiseStream::new(vec![1.0; 1024], StreamKind::TrainVal);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pair = inject_noise(&beat, &mut stream, &mut rng);
        assert!(pair.degenerate);
        assert_eq!(pair.noisy, pair.clean.samples);
    }

    #[test]
    fn alpha_zero_reproduces_the_clean_beat() {
        let beat = beat_with(vec![1.0, -2.0, 0.5], 3);
        let mut stream = NoiseStream::new(vec![3.0; 2048], StreamKind::TrainVal);
        let pair = inject_noise_scaled(&beat, &mut stream, 0.0, ScaleMode::PeakAbs);
        assert_eq!(pair.noisy, pair.clean.samples);
        assert!(!pair.degenerate);
    }

    #[test]
    fn peak_to_peak_mode_matches_ranges() {
        // Beat range 3.0 (from −2 to 1); window range 2.0 (from −0.5 to 1.5
        // over the first three samples). α = 1 → scale = 1.5.
        let beat = beat_with(vec![1.0, -2.0, 0.5], 3);
        let mut stream =
            NoiseStream::new(vec![1.5, -0.5, 0.5, 9.0], StreamKind::TrainVal);
        let pair = inject_noise_scaled(&beat, &mut stream, 1.0, ScaleMode::PeakToPeak);
        let scale = (pair.noisy[0] - pair.clean.samples[0]) / 1.5;
        assert!((scale - 1.5).abs() < 1e-12);
    }

    #[test]
    fn fixed_seed_reproduces_pairs() {
        let beat = beat_with((0..200).map(|i| (i as f64 * 0.1).sin()).collect(), 200);
        let noise: Vec<f64> = (0..4096).map(|i| (i as f64 * 0.01).cos()).collect();
        let run = || {
            let mut stream = NoiseStream::new(noise.clone(), StreamKind::TrainVal);
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            (0..5)
                .map(|_| inject_noise(&beat, &mut stream, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
