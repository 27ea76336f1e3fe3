//! The binary imbalance comparison on real MNIST: one rare digit against all
//! the others, trained with and without real-world weights.
//!
//! ```not_rust
//! cargo run --release --example binary_imbalance_suite -- 0,3,8
//! ```

use rwwce::data::{default_data_dir, MnistFiles};
use rwwce::experiments::{run_binary_suite, BinarySuiteConfig};

fn main() -> rwwce::Result<()> {
    let digits = std::env::args()
        .nth(1)
        .map(|a| a.split(',').filter_map(|d| d.parse().ok()).collect())
        .unwrap_or_else(|| vec![0, 1, 2]);
    let pool = MnistFiles::in_dir(default_data_dir()).load()?;
    let config = BinarySuiteConfig {
        digits,
        base_seed: 42,
        ..BinarySuiteConfig::default()
    };
    let outcome = run_binary_suite(&config, &pool)?;
    for r in &outcome.records {
        println!(
            "trial {} {:<9} fn {:>3} fp {:>4} threshold {:.3} cost ${:.3}",
            r.trial,
            r.model.to_string(),
            r.false_negatives.unwrap_or(0),
            r.false_positives.unwrap_or(0),
            r.threshold.unwrap_or(f64::NAN),
            r.real_world_cost
        );
    }
    print!("\n{}", outcome.summary.to_table());
    Ok(())
}
