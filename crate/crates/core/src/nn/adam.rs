use crate::error::{Error, Result};
use crate::nn::{Gradients, Mlp, TrainConfig};

/// First and second moment accumulators, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(mlp: &Mlp) -> Self {
        let zeros: Vec<Vec<f64>> = mlp
            .parameters()
            .iter()
            .map(|p| vec![0.0; p.len()])
            .collect();
        AdamState {
            first: zeros.clone(),
            second: zeros,
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update of every parameter.
pub fn adam_step(
    mlp: &mut Mlp,
    grads: &Gradients,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    let grads = grads.slices();
    let mut params = mlp.parameters_mut();
    let shapes_match = params.len() == grads.len()
        && params.len() == state.first.len()
        && params
            .iter()
            .zip(&grads)
            .zip(&state.first)
            .all(|((p, g), m)| p.len() == g.len() && p.len() == m.len());
    if !shapes_match {
        return Err(Error::Shape(
            "gradients or optimizer state do not match the network".into(),
        ));
    }

    state.step += 1;
    let t = i32::try_from(state.step).unwrap_or(i32::MAX);
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let correction1 = 1.0 - b1.powi(t);
    let correction2 = 1.0 - b2.powi(t);

    for (((param, grad), m), v) in params
        .iter_mut()
        .zip(&grads)
        .zip(&mut state.first)
        .zip(&mut state.second)
    {
        for i in 0..param.len() {
            let g = grad[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            let m_hat = m[i] / correction1;
            let v_hat = v[i] / correction2;
            param[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_epsilon);
        }
    }
    Ok(())
}
