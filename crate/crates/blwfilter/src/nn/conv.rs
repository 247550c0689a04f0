//! Dilated 1-D convolution with same-length zero padding, forward and adjoint.
//!
//! Tap semantics: a kernel of odd size `K` with dilation rate `r` places its
//! taps at centered offsets `(s - K/2) * (r + 1)` for `s in 0..K`, so `r = 0`
//! is the standard convolution and the kernel stretches without gaining
//! parameters as `r` grows. Out-of-range taps read zero, which keeps the
//! output exactly as long as the input.
//!
//! Each tap contributes `y[b, :, i] += W[:, :, s] * x[b, :, i + offset]`, a
//! (C_out x C_in) by (C_in x L_valid) matrix product. To keep those products
//! large enough to saturate one core, the batch is repacked channel-major
//! into one row per channel with a zero margin around every batch element
//! wide enough for the farthest tap; each tap of the whole batch then runs as
//! a single shifted GEMM over one long row instead of one small GEMM per
//! element. Margin columns accumulate values that are never read back. The
//! weight gradient bypasses GEMM entirely: its output is a tiny
//! `C_out x C_in x K` block, which GEMM packing handles poorly, so a
//! register-blocked kernel computes four output channels per pass over the
//! data instead. Taps are visited in ascending order with a fixed summation
//! layout, keeping results reproducible bit-for-bit.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Weights, bias, and geometry of one convolution layer.
///
/// `weight` is `[C_out, C_in, K]` row-major; `bias` is `[C_out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    dilation_rate: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvParams {
    /// Zero-initialized layer. `kernel` must be odd so the taps can center.
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        dilation_rate: usize,
    ) -> Result<Self> {
        if kernel % 2 == 0 {
            return Err(Error::Config(format!(
                "convolution kernel size must be odd, got {kernel}"
            )));
        }
        if in_channels == 0 || out_channels == 0 || kernel == 0 {
            return Err(Error::Config(
                "convolution channels and kernel size must be positive".into(),
            ));
        }
        Ok(ConvParams {
            in_channels,
            out_channels,
            kernel,
            dilation_rate,
            weight: vec![0.0; out_channels * in_channels * kernel],
            bias: vec![0.0; out_channels],
        })
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn dilation_rate(&self) -> usize {
        self.dilation_rate
    }

    /// Weight count plus bias count.
    pub fn parameter_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    /// Distance between adjacent taps: `r + 1`.
    pub fn tap_spacing(&self) -> usize {
        self.dilation_rate + 1
    }

    /// Signed input offset of tap `s` relative to the output index.
    fn tap_offset(&self, s: usize) -> isize {
        (s as isize - (self.kernel / 2) as isize) * self.tap_spacing() as isize
    }

    /// Zero margin each batch element needs in the packed layout so every
    /// tap of that element stays inside its own padded span.
    fn margin(&self) -> usize {
        (self.kernel / 2) * self.tap_spacing()
    }
}

/// Gradients of a convolution layer's own parameters.
#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// `c[m, n] += a[m, k] * b[k, n]` with explicit element strides.
///
/// Wraps the GEMM kernel; strides let the caller point rows at channel slices
/// inside larger tensors without copying.
#[allow(clippy::too_many_arguments)]
fn gemm_acc(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    rsa: isize,
    csa: isize,
    b: &[f64],
    rsb: isize,
    csb: isize,
    c: &mut [f64],
    rsc: isize,
    csc: isize,
) {
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    debug_assert!((m as isize - 1) * rsa + (k as isize - 1) * csa < a.len() as isize);
    debug_assert!((k as isize - 1) * rsb + (n as isize - 1) * csb < b.len() as isize);
    debug_assert!((m as isize - 1) * rsc + (n as isize - 1) * csc < c.len() as isize);
    // Safety: the debug asserts above state the required bounds; all callers
    // pass strides derived from tensor shapes, so the highest linear index in
    // each buffer stays in range. The buffers never alias.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            1.0,
            c.as_mut_ptr(),
            rsc,
            csc,
        );
    }
}

/// Repack `channels` channels starting at `ch_offset` into one row per
/// channel, each batch element padded with `margin` zeros on both sides:
/// `[0; m] elem0 [0; m] [0; m] elem1 [0; m] ...`, so an element spans
/// `len + 2 * margin` columns and shifted reads never cross into a neighbor.
fn pack_padded(src: &Tensor, ch_offset: usize, channels: usize, margin: usize) -> Vec<f64> {
    let (bsz, _, len) = src.shape();
    debug_assert!(ch_offset + channels <= src.channels());
    let p = len + 2 * margin;
    let mut out = vec![0.0; channels * bsz * p];
    for ch in 0..channels {
        for b in 0..bsz {
            out[ch * bsz * p + b * p + margin..][..len]
                .copy_from_slice(src.channel(b, ch_offset + ch));
        }
    }
    out
}

/// Global column range `[lo, hi)` where both `t` and `t + o` stay in `0..n`.
fn tap_span(n: usize, o: isize) -> Option<(usize, usize)> {
    let lo = 0.max(-o);
    let hi = n as isize - 0.max(o);
    if hi <= lo {
        return None;
    }
    Some((lo as usize, hi as usize))
}

/// `out[j] = sum_i ups[j][i] * xs[i]` for up to four rows in one pass, so the
/// shared row is loaded once per block of rows. Four lane accumulators plus a
/// scalar tail keep the loop vectorizable; the lane split depends only on the
/// length, so the summation order is fixed and results are reproducible.
fn dot_rows<const NB: usize>(ups: [&[f64]; NB], xs: &[f64]) -> [f64; NB] {
    let len = xs.len();
    for u in &ups {
        debug_assert_eq!(u.len(), len);
    }
    let mut lanes = [[0.0f64; 4]; NB];
    let mut i = 0;
    while i + 4 <= len {
        for l in 0..4 {
            let xv = xs[i + l];
            for (j, u) in ups.iter().enumerate() {
                lanes[j][l] += u[i + l] * xv;
            }
        }
        i += 4;
    }
    let mut out = [0.0f64; NB];
    for (j, lane) in lanes.iter().enumerate() {
        out[j] = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    }
    while i < len {
        let xv = xs[i];
        for (j, u) in ups.iter().enumerate() {
            out[j] += u[i] * xv;
        }
        i += 1;
    }
    out
}

fn check_input(input: &Tensor, params: &ConvParams, context: &'static str) -> Result<()> {
    if input.channels() != params.in_channels {
        return Err(Error::ShapeMismatch {
            context,
            expected: format!("{} input channels", params.in_channels),
            got: format!("{} channels", input.channels()),
        });
    }
    if input.len() == 0 {
        return Err(Error::ShapeMismatch {
            context,
            expected: "length >= 1".into(),
            got: "length 0".into(),
        });
    }
    Ok(())
}

/// Dilated convolution with same-length zero padding.
///
/// Output shape is `(B, C_out, L)` for input `(B, C_in, L)`.
pub fn conv1d(input: &Tensor, params: &ConvParams) -> Result<Tensor> {
    check_input(input, params, "conv1d")?;
    let mut out = Tensor::zeros(input.batch(), params.out_channels, input.len());
    conv1d_into(input, params, &mut out, 0);
    Ok(out)
}

/// Run the convolution, writing output channels into `out` starting at
/// channel `c_offset`. `out` must have the input's batch size and length.
/// Lets multi-branch layers write concatenated feature maps without copies.
pub(crate) fn conv1d_into(input: &Tensor, params: &ConvParams, out: &mut Tensor, c_offset: usize) {
    let (bsz, c_in, len) = input.shape();
    debug_assert_eq!(c_in, params.in_channels);
    debug_assert_eq!(out.batch(), bsz);
    debug_assert_eq!(out.len(), len);
    debug_assert!(c_offset + params.out_channels <= out.channels());

    let c_out = params.out_channels;
    let k = params.kernel;
    let m = params.margin();
    let p = len + 2 * m;
    let n = bsz * p;

    let x_pad = pack_padded(input, 0, c_in, m);
    let mut y_pad = vec![0.0; c_out * n];
    for s in 0..k {
        let o = params.tap_offset(s);
        let Some((lo, hi)) = tap_span(n, o) else {
            continue;
        };
        gemm_acc(
            c_out,
            c_in,
            hi - lo,
            &params.weight[s..],
            (c_in * k) as isize,
            k as isize,
            &x_pad[(lo as isize + o) as usize..],
            n as isize,
            1,
            &mut y_pad[lo..],
            n as isize,
            1,
        );
    }
    for b in 0..bsz {
        for (co, &bias) in params.bias.iter().enumerate() {
            let src = &y_pad[co * n + b * p + m..][..len];
            let dst = out.channel_mut(b, c_offset + co);
            for (d, &v) in dst.iter_mut().zip(src) {
                *d = v + bias;
            }
        }
    }
}

/// Adjoint of [`conv1d`]: gradients with respect to input, weights, and bias.
///
/// Returns `(input_grad, parameter_grads)`.
pub fn conv1d_backward(
    input: &Tensor,
    params: &ConvParams,
    upstream_grad: &Tensor,
) -> Result<(Tensor, ConvGrads)> {
    check_input(input, params, "conv1d_backward")?;
    let expected = (input.batch(), params.out_channels, input.len());
    if upstream_grad.shape() != expected {
        return Err(Error::ShapeMismatch {
            context: "conv1d_backward",
            expected: format!("{expected:?}"),
            got: format!("{:?}", upstream_grad.shape()),
        });
    }
    let mut input_grad = Tensor::zeros(input.batch(), input.channels(), input.len());
    let mut grads = ConvGrads {
        weight: vec![0.0; params.weight.len()],
        bias: vec![0.0; params.bias.len()],
    };
    conv1d_backward_into(input, params, upstream_grad, 0, &mut input_grad, &mut grads);
    Ok((input_grad, grads))
}

/// Backward pass reading upstream channels starting at `up_offset` inside a
/// wider gradient tensor and accumulating into `input_grad` and `grads`.
pub(crate) fn conv1d_backward_into(
    input: &Tensor,
    params: &ConvParams,
    upstream: &Tensor,
    up_offset: usize,
    input_grad: &mut Tensor,
    grads: &mut ConvGrads,
) {
    let (bsz, c_in, len) = input.shape();
    let c_out = params.out_channels;
    let k = params.kernel;
    debug_assert_eq!(upstream.batch(), bsz);
    debug_assert_eq!(upstream.len(), len);
    debug_assert!(up_offset + c_out <= upstream.channels());
    debug_assert_eq!(input_grad.shape(), input.shape());

    for b in 0..bsz {
        for co in 0..c_out {
            let sum: f64 = upstream.channel(b, up_offset + co).iter().sum();
            grads.bias[co] += sum;
        }
    }

    let m = params.margin();
    let p = len + 2 * m;
    let n = bsz * p;
    let up_pad = pack_padded(upstream, up_offset, c_out, m);
    let x_pad = pack_padded(input, 0, c_in, m);
    let mut dx_pad = vec![0.0; c_in * n];

    // dX[:, t + o] += W_s^T (C_in x C_out) . dY[:, t]; the upstream margins
    // are zero, so columns outside any batch element contribute nothing.
    for s in 0..k {
        let o = params.tap_offset(s);
        let Some((lo, hi)) = tap_span(n, o) else {
            continue;
        };
        gemm_acc(
            c_in,
            c_out,
            hi - lo,
            &params.weight[s..],
            k as isize,
            (c_in * k) as isize,
            &up_pad[lo..],
            n as isize,
            1,
            &mut dx_pad[(lo as isize + o) as usize..],
            n as isize,
            1,
        );
    }

    // dW[co, ci, s] += sum_t dY[co, t] * X[ci, t + o]. One pass over the
    // shared input row covers a block of output channels.
    for ci in 0..c_in {
        let x_row = &x_pad[ci * n..(ci + 1) * n];
        for s in 0..k {
            let o = params.tap_offset(s);
            let Some((lo, hi)) = tap_span(n, o) else {
                continue;
            };
            let xs = &x_row[(lo as isize + o) as usize..(hi as isize + o) as usize];
            let up_row = |co: usize| &up_pad[co * n + lo..co * n + hi];
            let mut co = 0;
            while co + 4 <= c_out {
                let r = dot_rows([up_row(co), up_row(co + 1), up_row(co + 2), up_row(co + 3)], xs);
                for (j, v) in r.into_iter().enumerate() {
                    grads.weight[((co + j) * c_in + ci) * k + s] += v;
                }
                co += 4;
            }
            if co + 2 <= c_out {
                let r = dot_rows([up_row(co), up_row(co + 1)], xs);
                grads.weight[(co * c_in + ci) * k + s] += r[0];
                grads.weight[((co + 1) * c_in + ci) * k + s] += r[1];
                co += 2;
            }
            if co < c_out {
                let r = dot_rows([up_row(co)], xs);
                grads.weight[(co * c_in + ci) * k + s] += r[0];
            }
        }
    }

    for b in 0..bsz {
        for ci in 0..c_in {
            let src = &dx_pad[ci * n + b * p + m..][..len];
            let dst = input_grad.channel_mut(b, ci);
            for (d, &v) in dst.iter_mut().zip(src) {
                *d += v;
            }
        }
    }
}
