//! Forward-backward (zero-phase) filtering.
//!
//! The signal is extended at both ends by odd reflection, filtered once
//! forward and once backward with the filter state initialized to the
//! steady-state response for a constant input, and the extensions are
//! stripped. Two passes square the magnitude response and cancel the phase,
//! so features keep their positions.
//!
//! IIR filters run through a direct-form II transposed recursion; FIR
//! filters run as an FFT convolution of the extension-padded signal, which
//! computes the same pass (a constant pre-history equals the steady-state
//! initial condition) at a cost that no longer scales with tap count times
//! signal length.

use crate::error::{Error, Result};
use crate::filters::fir::FirDesign;
use crate::filters::iir::IirDesign;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// A designed classical filter ready to apply.
#[derive(Debug, Clone)]
pub enum ClassicalFilter {
    Fir(FirDesign),
    Iir(IirDesign),
}

impl ClassicalFilter {
    /// Order for padding purposes: tap count for FIR (the convention the
    /// design is quoted in), pole count for IIR.
    pub fn order(&self) -> usize {
        match self {
            ClassicalFilter::Fir(d) => d.params.num_taps,
            ClassicalFilter::Iir(d) => d.params.order,
        }
    }

    /// Sampling rate the design targets.
    pub fn fs_hz(&self) -> f64 {
        match self {
            ClassicalFilter::Fir(d) => d.params.fs_hz,
            ClassicalFilter::Iir(d) => d.params.fs_hz,
        }
    }

    /// One causal pass with steady-state initial conditions.
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ClassicalFilter::Fir(d) => fir_forward(&d.taps, x),
            ClassicalFilter::Iir(d) => {
                let zi = lfilter_zi(&d.b, &d.a);
                let scaled: Vec<f64> = zi.iter().map(|z| z * x.first().copied().unwrap_or(0.0)).collect();
                lfilter(&d.b, &d.a, x, &scaled)
            }
        }
    }

    /// Apply the filter forward and backward over `x`, returning a signal of
    /// the same length. Ends are extended by odd reflection of length
    /// `min(3 * order, len - 1)` before filtering.
    pub fn zero_phase(&self, x: &[f64]) -> Vec<f64> {
        if x.is_empty() {
            return Vec::new();
        }
        let n = x.len();
        let padlen = (3 * self.order()).min(n - 1);

        let mut ext = Vec::with_capacity(n + 2 * padlen);
        let first = x[0];
        let last = x[n - 1];
        for i in (1..=padlen).rev() {
            ext.push(2.0 * first - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=padlen {
            ext.push(2.0 * last - x[n - 1 - i]);
        }

        let mut fwd = self.forward(&ext);
        fwd.reverse();
        let mut back = self.forward(&fwd);
        back.reverse();
        back[padlen..padlen + n].to_vec()
    }
}

/// Causal linear filter, direct form II transposed, with initial state `zi`
/// of length `max(len(a), len(b)) - 1`. `a[0]` must be 1.
pub fn lfilter(b: &[f64], a: &[f64], x: &[f64], zi: &[f64]) -> Vec<f64> {
    let order = a.len().max(b.len()) - 1;
    debug_assert_eq!(zi.len(), order);
    debug_assert!((a[0] - 1.0).abs() < 1e-12, "denominator must be monic");
    let mut bb = vec![0.0; order + 1];
    let mut aa = vec![0.0; order + 1];
    bb[..b.len()].copy_from_slice(b);
    aa[..a.len()].copy_from_slice(a);

    let mut z = zi.to_vec();
    let mut y = Vec::with_capacity(x.len());
    for &xn in x {
        let yn = bb[0] * xn + if order > 0 { z[0] } else { 0.0 };
        for k in 0..order.saturating_sub(1) {
            z[k] = bb[k + 1] * xn + z[k + 1] - aa[k + 1] * yn;
        }
        if order > 0 {
            z[order - 1] = bb[order] * xn - aa[order] * yn;
        }
        y.push(yn);
    }
    y
}

/// Initial filter state that makes the step response start at its steady
/// state: with `zi` scaled by a constant input level, `lfilter` outputs the
/// constant times the DC gain from the very first sample.
pub fn lfilter_zi(b: &[f64], a: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let order = n - 1;
    if order == 0 {
        return Vec::new();
    }
    let mut bb = vec![0.0; n];
    let mut aa = vec![0.0; n];
    bb[..b.len()].copy_from_slice(b);
    aa[..a.len()].copy_from_slice(a);
    let a0 = aa[0];
    for v in bb.iter_mut() {
        *v /= a0;
    }
    for v in aa.iter_mut() {
        *v /= a0;
    }

    // Solve (I − Aᵀ) zi = B where A is the companion matrix of `aa` and
    // B[i] = b[i+1] − a[i+1] b[0]: the fixed point of the state recursion
    // under unit input.
    let mut m = vec![vec![0.0; order]; order];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let a_t = if j == 0 {
                -aa[i + 1]
            } else if j == i + 1 {
                1.0
            } else {
                0.0
            };
            *cell = if i == j { 1.0 - a_t } else { -a_t };
        }
    }
    let rhs: Vec<f64> = (0..order).map(|i| bb[i + 1] - aa[i + 1] * bb[0]).collect();
    solve_dense(m, rhs)
}

/// Gaussian elimination with partial pivoting for the small dense systems
/// the state solve produces.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        debug_assert!(m[col][col].abs() > 1e-300, "singular state system");
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                let upper = m[col][k];
                m[row][k] -= f * upper;
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// One causal FIR pass with constant pre-history: the signal is preceded by
/// `taps.len() - 1` copies of its first sample (the steady state for the
/// initial level), convolved via FFT, and cut back to length.
fn fir_forward(taps: &[f64], x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let k = taps.len();
    let mut pre = Vec::with_capacity(x.len() + k - 1);
    pre.resize(k - 1, x[0]);
    pre.extend_from_slice(x);
    let full = fft_convolve(&pre, taps);
    full[k - 1..k - 1 + x.len()].to_vec()
}

/// Full linear convolution via FFT; output length `x.len() + h.len() − 1`.
pub fn fft_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let mut fx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fx.resize(n, Complex64::new(0.0, 0.0));
    let mut fh: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fh.resize(n, Complex64::new(0.0, 0.0));

    fft.process(&mut fx);
    fft.process(&mut fh);
    for (a, b) in fx.iter_mut().zip(fh.iter()) {
        *a *= b;
    }
    ifft.process(&mut fx);
    let scale = 1.0 / n as f64;
    fx.truncate(out_len);
    fx.iter().map(|c| c.re * scale).collect()
}

/// Convenience: design-independent validation that a filter and signal use
/// the same sampling rate, for call sites that track rates explicitly.
pub fn check_rate(filter: &ClassicalFilter, fs_hz: f64) -> Result<()> {
    let want = filter.fs_hz();
    if (want - fs_hz).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "filter designed for {want} Hz applied to a {fs_hz} Hz signal"
        )));
    }
    Ok(())
}
