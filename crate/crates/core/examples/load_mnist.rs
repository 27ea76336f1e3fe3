//! Loads the four MNIST files into one pool and builds one binary dataset.
//!
//! ```not_rust
//! RWWCE_DATA_DIR=/path/to/mnist cargo run --example load_mnist
//! ```

use rwwce::data::{default_data_dir, make_binary_dataset, split, MnistFiles};

fn main() -> rwwce::Result<()> {
    let pool = MnistFiles::in_dir(default_data_dir()).load()?;
    println!("{} images, per digit {:?}", pool.len(), pool.class_counts());

    let zeros = make_binary_dataset(&pool, 0, 0)?;
    let positives = zeros.labels().iter().filter(|&&l| l == 1).count();
    println!(
        "digit 0, slice 0: {} examples, {positives} positive",
        zeros.len()
    );
    let parts = split(&zeros, 0)?;
    println!(
        "train {} / validation {} / test {}",
        parts.train.len(),
        parts.validation.len(),
        parts.test.len()
    );
    let first = pool.image(0);
    for row in first.chunks(28).step_by(2) {
        let line: String = row
            .iter()
            .map(|&p| {
                if p > 127 {
                    '#'
                } else if p > 31 {
                    '+'
                } else {
                    ' '
                }
            })
            .collect();
        println!("{line}");
    }
    println!("label {}", pool.labels()[0]);
    Ok(())
}
