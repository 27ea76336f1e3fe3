//! Picking the decision threshold that maximizes F1 on held-out scores.
//!
//! ```not_rust
//! cargo run --example threshold_search
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rwwce::metrics::{best_f1_threshold, confusion_binary, f1};

fn main() -> rwwce::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..2000 {
        let positive = rng.gen_bool(0.02);
        // Positives score higher on average but rarely clear 0.5.
        let mean: f64 = if positive { 0.35 } else { 0.1 };
        scores.push((mean + rng.gen_range(-0.2..0.2)).clamp(0.0, 1.0));
        labels.push(u8::from(positive));
    }

    let at_half = confusion_binary(&scores, &labels, 0.5)?;
    println!("threshold 0.500: F1 {:.3} ({:?})", f1(&at_half), at_half);
    let best = best_f1_threshold(&scores, &labels)?;
    let tuned = confusion_binary(&scores, &labels, best.threshold)?;
    println!(
        "threshold {:.3}: F1 {:.3} ({:?})",
        best.threshold, best.f1, tuned
    );
    Ok(())
}
