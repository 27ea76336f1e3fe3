//! Paired t-test between two models scored on the same ten datasets.
//!
//! ```not_rust
//! cargo run --example paired_t_test
//! ```

use rwwce::metrics::paired_t_test;

fn main() -> rwwce::Result<()> {
    let baseline = [45.0, 38.0, 51.0, 40.0, 47.0, 44.0, 39.0, 50.0, 42.0, 46.0];
    let candidate = [17.0, 15.0, 19.0, 14.0, 18.0, 16.0, 13.0, 20.0, 15.0, 16.0];
    let r = paired_t_test(&baseline, &candidate)?;
    println!(
        "t = {:.4}, df = {}, two-sided p = {:.3e}",
        r.t_statistic, r.df, r.p_value
    );

    let noisy = [44.0, 39.0, 50.0, 41.0, 46.0, 45.0, 38.0, 51.0, 41.0, 47.0];
    let r = paired_t_test(&baseline, &noisy)?;
    println!(
        "near-identical models: t = {:.4}, p = {:.3}",
        r.t_statistic, r.p_value
    );
    Ok(())
}
