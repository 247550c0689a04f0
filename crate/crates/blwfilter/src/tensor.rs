//! Dense rank-3 tensors for batched 1-D signals.
//!
//! Everything the networks touch is a `[batch, channels, len]` tensor of
//! `f64`, stored contiguously in row-major order so that each channel is a
//! contiguous slice. Signals are short (512 samples), so there is no need
//! for views or broadcasting; plain slices keep the numeric kernels simple.

/// A `[batch, channels, len]` tensor of `f64`, contiguous, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    batch: usize,
    channels: usize,
    len: usize,
    data: Vec<f64>,
}

impl Tensor {
    /// All-zero tensor of the given shape.
    pub fn zeros(batch: usize, channels: usize, len: usize) -> Self {
        Tensor {
            batch,
            channels,
            len,
            data: vec![0.0; batch * channels * len],
        }
    }

    /// Build from a flat row-major buffer. `data.len()` must equal
    /// `batch * channels * len`.
    pub fn from_vec(batch: usize, channels: usize, len: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            batch * channels * len,
            "buffer length {} does not match shape [{batch}, {channels}, {len}]",
            data.len(),
        );
        Tensor {
            batch,
            channels,
            len,
            data,
        }
    }

    /// Shape as `(batch, channels, len)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.batch, self.channels, self.len)
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flat row-major contents.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// One channel of one batch element, as a contiguous slice.
    pub fn channel(&self, b: usize, c: usize) -> &[f64] {
        debug_assert!(b < self.batch && c < self.channels);
        let start = (b * self.channels + c) * self.len;
        &self.data[start..start + self.len]
    }

    pub fn channel_mut(&mut self, b: usize, c: usize) -> &mut [f64] {
        debug_assert!(b < self.batch && c < self.channels);
        let start = (b * self.channels + c) * self.len;
        &mut self.data[start..start + self.len]
    }

    /// Element accessor; prefer `channel` in hot loops.
    pub fn at(&self, b: usize, c: usize, i: usize) -> f64 {
        debug_assert!(i < self.len);
        self.data[(b * self.channels + c) * self.len + i]
    }

    pub fn set(&mut self, b: usize, c: usize, i: usize, v: f64) {
        debug_assert!(i < self.len);
        self.data[(b * self.channels + c) * self.len + i] = v;
    }

    /// All batch rows for the given channel range stacked into a new tensor.
    /// Used to split concatenated feature maps back into branch outputs.
    pub fn slice_channels(&self, from: usize, to: usize) -> Tensor {
        assert!(from <= to && to <= self.channels);
        let width = to - from;
        let mut out = Tensor::zeros(self.batch, width, self.len);
        for b in 0..self.batch {
            for c in 0..width {
                out.channel_mut(b, c)
                    .copy_from_slice(self.channel(b, from + c));
            }
        }
        out
    }
}

/// Concatenate tensors along the channel axis. All inputs must share batch
/// size and length.
pub fn channel_concat(parts: &[&Tensor]) -> Tensor {
    assert!(!parts.is_empty(), "cannot concatenate zero tensors");
    let batch = parts[0].batch;
    let len = parts[0].len;
    for p in parts {
        assert_eq!(
            (p.batch, p.len),
            (batch, len),
            "channel_concat inputs must share batch and length"
        );
    }
    let channels: usize = parts.iter().map(|p| p.channels).sum();
    let mut out = Tensor::zeros(batch, channels, len);
    for b in 0..batch {
        let mut at = 0;
        for p in parts {
            for c in 0..p.channels {
                out.channel_mut(b, at + c).copy_from_slice(p.channel(b, c));
            }
            at += p.channels;
        }
    }
    out
}

/// Split a gradient flowing into a concatenated tensor back into per-part
/// gradients with the given channel counts. Inverse of [`channel_concat`].
pub fn channel_split(grad: &Tensor, widths: &[usize]) -> Vec<Tensor> {
    let total: usize = widths.iter().sum();
    assert_eq!(
        total,
        grad.channels,
        "split widths must cover all channels"
    );
    let mut parts = Vec::with_capacity(widths.len());
    let mut at = 0;
    for &w in widths {
        parts.push(grad.slice_channels(at, at + w));
        at += w;
    }
    parts
}
