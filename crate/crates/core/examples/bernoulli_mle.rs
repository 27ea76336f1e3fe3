//! A coin that pays 9 stickers for heads and 1 toy for tails: the weighted
//! loss is minimized where the weighted likelihood peaks.
//!
//! ```not_rust
//! cargo run --example bernoulli_mle -- curve.csv
//! ```

use rwwce::bernoulli::{
    analytic_minimizer, descend, likelihood_check, loss_curve, uniform_grid, BernoulliScenario,
};

fn main() -> rwwce::Result<()> {
    let game = BernoulliScenario::new(1, 1, 9.0, 1.0)?;
    println!("closed form p = {}", analytic_minimizer(&game)?);
    println!(
        "descent from 0.5 -> {:.6}",
        descend(&game, 0.5, 0.01, 100_000)?
    );
    println!(
        "descent from 0.1 -> {:.6}",
        descend(&game, 0.1, 0.01, 100_000)?
    );
    let check = likelihood_check(&game)?;
    println!("likelihood argmax {:.12}", check.likelihood_argmax);

    let curve = loss_curve(&game, &uniform_grid(19))?;
    for (p, j) in &curve.points {
        println!("{p:.2} {j:.4} {}", "#".repeat((j * 20.0) as usize));
    }
    if let Some(path) = std::env::args().nth(1) {
        loss_curve(&game, &uniform_grid(999))?.write_csv(path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
