//! Trains a tiny network on two noisy clusters with and without real-world weights.
//!
//! ```not_rust
//! cargo run --example train_toy
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rwwce::data::Dataset;
use rwwce::metrics::confusion_binary;
use rwwce::nn::{init_mlp, train, Activation, LayerSpec, TrainConfig};
use rwwce::{BinaryCostModel, LossSpec, Matrix};

fn main() -> rwwce::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..2000 {
        let positive = rng.gen_bool(0.05);
        let center = if positive { 1.0 } else { -1.0 };
        rows.push([
            center + rng.gen_range(-1.5..1.5),
            center + rng.gen_range(-1.5..1.5),
        ]);
        labels.push(u8::from(positive));
    }
    let data = Dataset::binary_from_matrix(Matrix::from_rows(&rows)?, labels.clone())?;
    let net = init_mlp(
        2,
        &[
            LayerSpec::new(8, Activation::Relu),
            LayerSpec::new(1, Activation::Sigmoid),
        ],
        1,
    )?;
    let config = TrainConfig {
        epochs: 20,
        batch_size: 50,
        learning_rate: 0.01,
        ..TrainConfig::default()
    };

    let cost = BinaryCostModel::new(20.0, 1.0)?;
    for loss in [LossSpec::Bce, LossSpec::RwwceBinary { cost }] {
        let outcome = train(net.clone(), &data, &loss, &config)?;
        let scores = outcome.mlp.predict(&data.features())?.into_vec();
        let c = confusion_binary(&scores, &labels, 0.5)?;
        println!(
            "{:<13} loss {:.4} -> {:.4}  fn {:>3} fp {:>3}",
            loss.name(),
            outcome.history[0],
            outcome.history[config.epochs - 1],
            c.fn_,
            c.fp
        );
    }
    Ok(())
}
