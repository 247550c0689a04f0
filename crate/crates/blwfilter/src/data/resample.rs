//! Rational-ratio resampling from 250 Hz to 360 Hz (ratio 36/25) by
//! windowed-sinc polyphase filtering.
//!
//! Conceptually the signal is zero-stuffed by the upsampling factor,
//! low-pass filtered at the original Nyquist frequency, and decimated; the
//! polyphase form computes only the surviving outputs. Each polyphase
//! branch is normalized to unit sum, so constants pass through exactly.
//! Ends are extended by odd reflection, which continues smooth signals to
//! second order and keeps constants constant.

use crate::filters::fir::{bessel_i0, sinc};

/// Upsampling factor for the 250 to 360 Hz conversion.
pub const UP: usize = 36;
/// Downsampling factor for the 250 to 360 Hz conversion.
pub const DOWN: usize = 25;

/// Kernel length at the upsampled rate. 1009 taps with β = 5 gives a
/// ~29 Hz transition band centered on the 125 Hz original Nyquist (at the
/// 9000 Hz internal rate), so everything below 100 Hz passes within the
/// ~0.2% Kaiser ripple and images are rejected by ~54 dB.
const KERNEL_TAPS: usize = 1009;
const KERNEL_BETA: f64 = 5.0;

/// Signal value at a possibly out-of-range index, by odd reflection about
/// the end samples (clamped for indices reflecting past the far end).
fn sample_extended(x: &[f64], i: i64) -> f64 {
    let n = x.len() as i64;
    if i < 0 {
        let r = (-i).min(n - 1) as usize;
        2.0 * x[0] - x[r]
    } else if i >= n {
        let r = (2 * n - 2 - i).max(0) as usize;
        2.0 * x[(n - 1) as usize] - x[r]
    } else {
        x[i as usize]
    }
}

/// Polyphase branches of the anti-imaging kernel, each normalized to unit
/// sum so the filter has exactly unit gain at DC in every phase.
fn polyphase_branches(up: usize, down: usize) -> Vec<Vec<f64>> {
    let m = (KERNEL_TAPS - 1) / 2;
    let cutoff = 0.5 / up.max(down) as f64; // cycles per upsampled sample
    let i0_beta = bessel_i0(KERNEL_BETA);
    let mut kernel = Vec::with_capacity(KERNEL_TAPS);
    for n in 0..KERNEL_TAPS {
        let d = n as f64 - m as f64;
        let frac = d / m as f64;
        let window = bessel_i0(KERNEL_BETA * (1.0 - frac * frac).max(0.0).sqrt()) / i0_beta;
        kernel.push(2.0 * cutoff * sinc(2.0 * cutoff * d) * window);
    }
    let mut branches = vec![Vec::new(); up];
    for (n, &h) in kernel.iter().enumerate() {
        branches[n % up].push(h);
    }
    for branch in branches.iter_mut() {
        let sum: f64 = branch.iter().sum();
        for h in branch.iter_mut() {
            *h /= sum;
        }
    }
    branches
}

/// Resample by the rational factor `up/down`. Output length is
/// `round(len · up / down)`; an empty input gives an empty output.
pub fn resample_rational(x: &[f64], up: usize, down: usize) -> Vec<f64> {
    assert!(up > 0 && down > 0, "resampling factors must be positive");
    if x.is_empty() {
        return Vec::new();
    }
    let out_len = ((x.len() * up) as f64 / down as f64).round() as usize;
    let branches = polyphase_branches(up, down);
    let m = (KERNEL_TAPS - 1) / 2;

    let mut y = Vec::with_capacity(out_len);
    for j in 0..out_len {
        // Output j sits at upsampled position j·down; tap n touches input
        // index i where n = phase + k·up and i = i0 − k.
        let num = j * down + m;
        let phase = num % up;
        let i0 = ((num - phase) / up) as i64;
        let mut acc = 0.0;
        for (k, &h) in branches[phase].iter().enumerate() {
            acc += h * sample_extended(x, i0 - k as i64);
        }
        y.push(acc);
    }
    y
}

/// Resample a 250 Hz signal to 360 Hz.
pub fn resample_250_to_360(x: &[f64]) -> Vec<f64> {
    resample_rational(x, UP, DOWN)
}
