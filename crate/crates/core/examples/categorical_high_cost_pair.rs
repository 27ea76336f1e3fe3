//! One expensive mislabeling among ten classes: how the weighted loss and its
//! logit gradient single it out.
//!
//! ```not_rust
//! cargo run --example categorical_high_cost_pair
//! ```

use rwwce::losses::{fused_logit_gradient, loss_value};
use rwwce::metrics::{high_cost_pair_costs, real_world_cost_categorical};
use rwwce::nn::softmax_rows;
use rwwce::{CategoricalCostModel, LossSpec, Matrix};

fn main() -> rwwce::Result<()> {
    let (truth, confused_with) = (1, 2);
    // True class 1, but a fifth of the mass sits on class 2.
    let mut logits = vec![0.0; 10];
    logits[truth] = 3.0;
    logits[confused_with] = 1.6;
    let z = Matrix::from_rows(&[logits])?;
    let mut y = Matrix::zeros(1, 10);
    y[(0, truth)] = 1.0;
    let h = softmax_rows(&z);
    println!(
        "p(true) = {:.3}, p(confused) = {:.3}",
        h[(0, truth)],
        h[(0, confused_with)]
    );

    let plain = LossSpec::Cce;
    let pair = LossSpec::RwwceCategorical {
        cost: CategoricalCostModel::high_cost_pair(10, truth, confused_with, 19.0, 1.0)?,
    };
    for spec in [&plain, &pair] {
        let g = fused_logit_gradient(spec, &z, &y)?;
        println!(
            "{:<18} loss {:.4}  dJ/dz[true] {:+.4}  dJ/dz[confused] {:+.4}  dJ/dz[other] {:+.4}",
            spec.name(),
            loss_value(spec, &h, &y)?,
            g[(0, truth)],
            g[(0, confused_with)],
            g[(0, 5)],
        );
    }

    // 1,000 test examples: 30 ordinary mistakes and 4 of the expensive kind.
    let mut tallies = Matrix::zeros(10, 10);
    for k in 0..10 {
        tallies[(k, k)] = 96.6;
    }
    tallies[(3, 8)] = 30.0;
    tallies[(truth, confused_with)] = 4.0;
    let costs = high_cost_pair_costs(10, truth, confused_with, 1.0, 19.0);
    println!(
        "real world cost per example: ${:.4}",
        real_world_cost_categorical(&tallies, &costs)?
    );
    Ok(())
}
