//! The high-cost-pair comparison on real MNIST for a few (true, predicted) pairs.
//!
//! ```not_rust
//! cargo run --release --example categorical_suite -- 1:2,4:9
//! ```

use rwwce::data::{default_data_dir, MnistFiles};
use rwwce::experiments::{run_categorical_suite, CategoricalSuiteConfig, PairSelection};

fn main() -> rwwce::Result<()> {
    let pairs: PairSelection = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "1:2,7:1".into())
        .parse()?;
    let pool = MnistFiles::in_dir(default_data_dir()).load()?;
    let config = CategoricalSuiteConfig {
        pairs,
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..CategoricalSuiteConfig::default()
    };
    let outcome = run_categorical_suite(&config, &pool)?;
    for r in &outcome.records {
        println!(
            "trial {} {:<12} high-cost {:>2} top-1 {:.2}%",
            r.trial,
            r.model.to_string(),
            r.high_cost_errors.unwrap_or(0),
            100.0 * r.top1_error
        );
    }
    print!("\n{}", outcome.summary.to_table());
    Ok(())
}
