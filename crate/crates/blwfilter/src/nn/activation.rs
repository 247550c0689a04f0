//! Pointwise activations: identity and rectifier.

use crate::tensor::Tensor;

/// The two activations the networks use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
        }
    }
}

/// Apply the activation elementwise.
pub fn activation(input: &Tensor, kind: Activation) -> Tensor {
    let mut out = input.clone();
    activation_inplace(out.data_mut(), kind);
    out
}

pub(crate) fn activation_inplace(values: &mut [f64], kind: Activation) {
    if kind == Activation::Relu {
        for v in values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
}

/// Gradient through the activation. The rectifier's gradient at exactly zero
/// is defined as zero, so only strictly positive inputs pass gradient.
pub fn activation_backward(input: &Tensor, upstream: &Tensor, kind: Activation) -> Tensor {
    debug_assert_eq!(input.shape(), upstream.shape());
    match kind {
        Activation::Linear => upstream.clone(),
        Activation::Relu => {
            let mut out = upstream.clone();
            for (g, &x) in out.data_mut().iter_mut().zip(input.data()) {
                if x <= 0.0 {
                    *g = 0.0;
                }
            }
            out
        }
    }
}

/// Mask `grad` in place using the already-rectified output: entries whose
/// activation output is zero were clamped (or exactly zero) and get no
/// gradient. Equivalent to masking on the pre-activation sign.
pub(crate) fn relu_mask_from_output(grad: &mut [f64], output: &[f64]) {
    debug_assert_eq!(grad.len(), output.len());
    for (g, &y) in grad.iter_mut().zip(output) {
        if y <= 0.0 {
            *g = 0.0;
        }
    }
}
