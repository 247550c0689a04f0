//! The composite training loss.
//!
//! Per beat the loss is `Σ(y_true − y_pred)² + λ·max((y_true − y_pred)²)`:
//! the sum-of-squares term drives overall fidelity and the weighted worst
//! sample suppresses localized spikes. Note the second term is the maximum
//! of the squared difference, exactly as the loss is defined, even though
//! a squared quantity is not literally a distance. The batch reduction is
//! the mean, so the loss scale is independent of batch size.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Default weight of the worst-sample term.
pub const DEFAULT_LAMBDA: f64 = 50.0;

fn check(y_true: &Tensor, y_pred: &Tensor, lambda: f64) -> Result<()> {
    if y_true.shape() != y_pred.shape() {
        return Err(Error::ShapeMismatch {
            context: "filtering loss",
            expected: format!("{:?}", y_true.shape()),
            got: format!("{:?}", y_pred.shape()),
        });
    }
    if lambda < 0.0 {
        return Err(Error::Config(format!("λ must be non-negative, got {lambda}")));
    }
    Ok(())
}

/// Mean over the batch of the per-beat composite loss.
pub fn filtering_loss(y_true: &Tensor, y_pred: &Tensor, lambda: f64) -> Result<f64> {
    check(y_true, y_pred, lambda)?;
    let (bsz, c, l) = y_true.shape();
    let per = c * l;
    let mut total = 0.0;
    for b in 0..bsz {
        let t = &y_true.data()[b * per..(b + 1) * per];
        let p = &y_pred.data()[b * per..(b + 1) * per];
        let mut sum = 0.0;
        let mut worst = 0.0f64;
        for (ti, pi) in t.iter().zip(p) {
            let sq = (ti - pi) * (ti - pi);
            sum += sq;
            worst = worst.max(sq);
        }
        total += sum + lambda * worst;
    }
    Ok(total / bsz as f64)
}

/// Loss value together with its gradient in `y_pred`.
///
/// The maximum term routes its gradient to the first sample attaining the
/// maximum squared difference (deterministic tie break).
pub fn filtering_loss_backward(
    y_true: &Tensor,
    y_pred: &Tensor,
    lambda: f64,
) -> Result<(f64, Tensor)> {
    check(y_true, y_pred, lambda)?;
    let (bsz, c, l) = y_true.shape();
    let per = c * l;
    let mut grad = Tensor::zeros(bsz, c, l);
    let mut total = 0.0;
    for b in 0..bsz {
        let t = &y_true.data()[b * per..(b + 1) * per];
        let p = &y_pred.data()[b * per..(b + 1) * per];
        let mut sum = 0.0;
        let mut worst = 0.0f64;
        let mut worst_at = 0usize;
        for (i, (ti, pi)) in t.iter().zip(p).enumerate() {
            let sq = (ti - pi) * (ti - pi);
            sum += sq;
            if sq > worst {
                worst = sq;
                worst_at = i;
            }
        }
        total += sum + lambda * worst;
        let g = &mut grad.data_mut()[b * per..(b + 1) * per];
        let scale = 1.0 / bsz as f64;
        for (i, (gi, (ti, pi))) in g.iter_mut().zip(t.iter().zip(p)).enumerate() {
            // d/dy_pred (t − p)² = −2(t − p); the max term adds the same at
            // its argmax only.
            let de = -2.0 * (ti - pi) * scale;
            *gi = de;
            if i == worst_at {
                *gi += lambda * de;
            }
        }
    }
    Ok((total / bsz as f64, grad))
}
