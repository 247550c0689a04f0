//! Adam optimizer with bias correction.

use crate::error::{Error, Result};

/// Moment estimates and step counter for one parameter vector.
///
/// Constants default to the cited algorithm's values (β1 = 0.9, β2 = 0.999,
/// ε = 1e-8); only the learning rate is tuned by the training schedule.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl OptimizerState {
    pub fn new(len: usize, learning_rate: f64) -> Self {
        assert!(learning_rate > 0.0, "learning rate must be positive");
        OptimizerState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One Adam update in place. `param_name` labels the gradient in errors.
///
/// m ← β1·m + (1−β1)·g, v ← β2·v + (1−β2)·g², then the bias-corrected
/// step θ ← θ − lr·m̂ / (√v̂ + ε).
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut OptimizerState,
    param_name: &str,
) -> Result<()> {
    assert_eq!(params.len(), grads.len(), "gradient shape mismatch");
    assert_eq!(params.len(), state.m.len(), "optimizer state shape mismatch");
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient {
            name: param_name.to_string(),
            step: state.step + 1,
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for ((p, &g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}
