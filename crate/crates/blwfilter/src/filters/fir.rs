//! High-pass FIR design: windowed sinc with a Kaiser window, spectrally
//! inverted.
//!
//! The low-pass prototype is a unity-DC windowed sinc at the cutoff; the
//! high-pass subtracts it from a unit impulse at the center tap, which flips
//! the band roles while preserving linear phase. The default parameters
//! (8079 taps, β = 2.18) are what the Kaiser design rules produce for a
//! 0.07 Hz transition band and 30.5 dB of stopband attenuation at a 360 Hz
//! sampling rate.
//!
//! Note on "order": the cited design convention counts taps, so the stored
//! `num_taps = 8079` is the number this filter is usually described by. The
//! tap count must be odd so the design has an exact center tap to invert
//! around (a symmetric even-length high-pass is not realizable: it forces a
//! null at the Nyquist frequency).

use crate::error::{Error, Result};

/// FIR design inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirParams {
    pub cutoff_hz: f64,
    pub fs_hz: f64,
    pub kaiser_beta: f64,
    /// Tap count; must be odd.
    pub num_taps: usize,
    /// Transition-band width in Hz, recorded for provenance.
    pub transition_width_hz: f64,
    /// Stopband attenuation target in dB, recorded for provenance.
    pub stopband_atten_db: f64,
}

impl Default for FirParams {
    fn default() -> Self {
        FirParams {
            cutoff_hz: 0.67,
            fs_hz: 360.0,
            kaiser_beta: 2.18,
            num_taps: 8079,
            transition_width_hz: 0.07,
            stopband_atten_db: 30.5,
        }
    }
}

/// A designed high-pass FIR filter.
#[derive(Debug, Clone)]
pub struct FirDesign {
    pub taps: Vec<f64>,
    pub params: FirParams,
}

/// Zeroth-order modified Bessel function of the first kind, by power series.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < sum * 1e-18 {
            return sum;
        }
        k += 1.0;
    }
}

/// `sin(πx)/(πx)` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Design the high-pass filter. The taps come out exactly symmetric: each
/// half is computed once and mirrored.
pub fn design_fir_highpass(params: &FirParams) -> Result<FirDesign> {
    if params.cutoff_hz <= 0.0 || params.cutoff_hz >= params.fs_hz / 2.0 {
        return Err(Error::Config(format!(
            "FIR cutoff {} Hz must lie inside (0, {}) Hz",
            params.cutoff_hz,
            params.fs_hz / 2.0
        )));
    }
    if params.num_taps % 2 == 0 || params.num_taps < 3 {
        return Err(Error::Config(format!(
            "FIR tap count must be odd and at least 3, got {}",
            params.num_taps
        )));
    }

    let n = params.num_taps;
    let m = (n - 1) / 2; // center index
    let fc = params.cutoff_hz / params.fs_hz; // cycles per sample
    let i0_beta = bessel_i0(params.kaiser_beta);

    // Low-pass half: windowed sinc for n in 0..=m (mirrored later).
    let mut taps = vec![0.0; n];
    for i in 0..=m {
        let d = i as f64 - m as f64; // ≤ 0 on this half
        let frac = d / m as f64;
        let window = bessel_i0(params.kaiser_beta * (1.0 - frac * frac).max(0.0).sqrt()) / i0_beta;
        taps[i] = 2.0 * fc * sinc(2.0 * fc * d) * window;
    }
    for i in 0..m {
        taps[n - 1 - i] = taps[i];
    }

    // Normalize the low-pass to exactly unit DC gain, then invert the
    // spectrum: high-pass = impulse − low-pass.
    let dc: f64 = taps.iter().sum();
    for t in taps.iter_mut() {
        *t = -(*t / dc);
    }
    taps[m] += 1.0;

    Ok(FirDesign {
        taps,
        params: *params,
    })
}
