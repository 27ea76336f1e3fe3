//! Backpropagated gradients of all six losses against central differences.
//!
//! ```not_rust
//! cargo run --release --example gradient_check -- 25
//! ```

use rwwce::nn::check_all_losses;

fn main() -> rwwce::Result<()> {
    let instances = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(20);
    for check in check_all_losses(7, instances, 1e-5, 1e-5)? {
        let w = &check.worst;
        println!(
            "{:<18} worst {:.2e} (analytic {:+.6e}, numeric {:+.6e}) {}",
            check.loss,
            w.max_relative_error,
            w.analytic,
            w.numeric,
            if check.passed() { "ok" } else { "FAILED" }
        );
    }
    Ok(())
}
