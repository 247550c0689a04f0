//! Finite-difference verification of analytic gradients.
//!
//! The probe loss is the plain sum of all outputs, whose gradient in the
//! output is exactly one everywhere. Analytic gradients come from the
//! graph's backward pass; numeric ones from central differences with step
//! `2^-20`, a power of two so that well-scaled probe points perturb exactly.

use crate::error::{Error, Result};
use crate::model::ModelGraph;
use crate::tensor::Tensor;

/// Central-difference step: 2^-20 ≈ 9.54e-7.
pub const FD_STEP: f64 = 1.0 / (1 << 20) as f64;

fn probe_loss(model: &ModelGraph, input: &Tensor) -> Result<f64> {
    let y = model.forward(input)?;
    let sum: f64 = y.data().iter().sum();
    if !sum.is_finite() {
        return Err(Error::NonFinite {
            context: "gradient check forward pass",
        });
    }
    Ok(sum)
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compare analytic gradients against central finite differences for every
/// parameter entry and every input entry. Returns the maximum relative
/// error, `|a − n| / max(|a|, |n|, 1e-8)`.
///
/// The fragment must be differentiable at the probe point; keep rectifier
/// pre-activations away from zero (random inputs away from kinks).
pub fn grad_check(model: &mut ModelGraph, input: &Tensor) -> Result<f64> {
    let cache = model.forward_train(input)?;
    let (b, c, l) = cache.output().shape();
    if cache.output().data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "gradient check forward pass",
        });
    }
    let ones = Tensor::from_vec(b, c, l, vec![1.0; b * c * l]);
    let (analytic, input_grad) = model.backward(&cache, &ones)?;

    let mut max_err: f64 = 0.0;

    let n_params = model.params().len();
    for pi in 0..n_params {
        for j in 0..model.params()[pi].len() {
            let orig = model.params()[pi][j];
            model.params_mut()[pi][j] = orig + FD_STEP;
            let plus = probe_loss(model, input)?;
            model.params_mut()[pi][j] = orig - FD_STEP;
            let minus = probe_loss(model, input)?;
            model.params_mut()[pi][j] = orig;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            max_err = max_err.max(relative_error(analytic.0[pi][j], numeric));
        }
    }

    let mut probe = input.clone();
    for j in 0..probe.data().len() {
        let orig = probe.data()[j];
        probe.data_mut()[j] = orig + FD_STEP;
        let plus = probe_loss(model, &probe)?;
        probe.data_mut()[j] = orig - FD_STEP;
        let minus = probe_loss(model, &probe)?;
        probe.data_mut()[j] = orig;
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        max_err = max_err.max(relative_error(input_grad.data()[j], numeric));
    }

    Ok(max_err)
}
