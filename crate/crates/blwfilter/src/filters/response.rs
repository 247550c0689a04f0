//! Frequency-response evaluation for the designed filters: the transfer
//! function on the unit circle at chosen physical frequencies.

use crate::filters::zero_phase::ClassicalFilter;
use rustfft::num_complex::Complex64;

/// Evaluate B(e^{jω})/A(e^{jω}) at `f_hz` given the sampling rate. For an
/// FIR filter pass `a = [1.0]`.
pub fn frequency_response_ba(b: &[f64], a: &[f64], f_hz: f64, fs_hz: f64) -> Complex64 {
    let omega = 2.0 * std::f64::consts::PI * f_hz / fs_hz;
    let eval = |coeffs: &[f64]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in coeffs.iter().enumerate() {
            let phase = -omega * k as f64;
            acc += Complex64::new(c * phase.cos(), c * phase.sin());
        }
        acc
    };
    eval(b) / eval(a)
}

/// Single-pass response of a filter at each frequency in `freqs_hz`.
///
/// Zero-phase application squares the magnitude and cancels the phase, so a
/// two-pass magnitude is this magnitude squared.
pub fn frequency_response(filter: &ClassicalFilter, freqs_hz: &[f64]) -> Vec<Complex64> {
    let one = [1.0];
    let (b, a, fs): (&[f64], &[f64], f64) = match filter {
        ClassicalFilter::Fir(d) => (&d.taps, &one, d.params.fs_hz),
        ClassicalFilter::Iir(d) => (&d.b, &d.a, d.params.fs_hz),
    };
    freqs_hz
        .iter()
        .map(|&f| frequency_response_ba(b, a, f, fs))
        .collect()
}
