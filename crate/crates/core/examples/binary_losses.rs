//! Binary losses on one small batch, and what the errors would cost.
//!
//! ```not_rust
//! cargo run --example binary_losses
//! ```

use rwwce::losses::loss_value;
use rwwce::metrics::{confusion_binary, real_world_cost_binary};
use rwwce::{BinaryCostModel, LossSpec, Matrix};

fn main() -> rwwce::Result<()> {
    // Four rare positives among twelve examples, scored by a timid model.
    let scores = [
        0.45, 0.30, 0.70, 0.20, 0.05, 0.10, 0.35, 0.02, 0.60, 0.15, 0.08, 0.25,
    ];
    let labels = [1u8, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0];
    let h = Matrix::column(&scores);
    let y = Matrix::column(&labels.map(f64::from));

    let cost = BinaryCostModel::new(2000.0, 100.0)?;
    let specs = [
        LossSpec::Bce,
        LossSpec::Wbce { weight: 20.0 },
        LossSpec::RwwceBinary { cost },
        LossSpec::RwwceBinary {
            cost: BinaryCostModel::new(1.0, 1.0)?,
        },
    ];
    for spec in &specs {
        println!("{:<14} {:>10.4}", spec.name(), loss_value(spec, &h, &y)?);
    }

    for threshold in [0.5, 0.4, 0.28] {
        let c = confusion_binary(&scores, &labels, threshold)?;
        let per_example =
            real_world_cost_binary(c.fn_ as f64, c.fp as f64, c.total() as f64, &cost)?;
        println!(
            "threshold {threshold:.2}: fn {} fp {} -> ${per_example:.2} per example",
            c.fn_, c.fp
        );
    }
    Ok(())
}
