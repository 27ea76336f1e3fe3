use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::{loss_value, LossSpec};
use crate::nn::{adam_step, analytic_gradients, AdamState, Mlp};

/// Mini-batch Adam training settings. Defaults are 10 epochs of batch 100,
/// step 0.001, β1 0.9, β2 0.999, ε 1e-7.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 100,
            learning_rate: 0.001,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-7,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        for (name, beta) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::Config(format!(
                    "{name} must lie in (0,1), got {beta}"
                )));
            }
        }
        if !(self.adam_epsilon.is_finite() && self.adam_epsilon >= 0.0) {
            return Err(Error::Config("adam_epsilon must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub mlp: Mlp,
    /// Mean training loss seen during each epoch (before each batch's update).
    pub history: Vec<f64>,
    pub updates: usize,
}

pub fn train(
    mut mlp: Mlp,
    data: &Dataset,
    loss: &LossSpec,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    let out = mlp.output_layer();
    loss.check_output(out.activation, out.out_dim())?;
    if data.is_binary() != loss.is_binary() {
        return Err(Error::Incompatible {
            loss: loss.name(),
            detail: format!(
                "a {} dataset",
                if data.is_binary() {
                    "binary"
                } else {
                    "categorical"
                }
            ),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdamState::new(&mlp);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut updates = 0;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let x = data.features_for(batch);
            let y = data.targets_for(batch);
            let (pass, grads) = analytic_gradients(&mlp, &x, &y, loss)?;
            total += loss_value(loss, &pass.output, &y)? * batch.len() as f64;
            adam_step(&mut mlp, &grads, &mut state, config)?;
            updates += 1;
        }
        let epoch_loss = total / data.len() as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Degenerate(format!(
                "training loss became {epoch_loss} in epoch {}",
                history.len() + 1
            )));
        }
        history.push(epoch_loss);
    }
    Ok(TrainOutcome {
        mlp,
        history,
        updates,
    })
}
