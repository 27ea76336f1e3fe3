//! Real-world-weighted cross-entropy: losses, a small dense network, MNIST
//! loading and the experiment drivers that compare weighted and unweighted training.

pub mod bernoulli;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiments;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod nn;

pub use error::{Error, Result};
pub use losses::{BinaryCostModel, CategoricalCostModel, LossSpec};
pub use matrix::Matrix;
