//! Trial and suite drivers for the binary-imbalance and high-cost-pair
//! experiments, plus their aggregation and persistence.

mod binary;
mod categorical;
mod records;
mod summary;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::Mlp;

pub use binary::{
    binary_trials, run_binary_suite, run_binary_trial, run_binary_trials, BinarySuiteConfig,
    BinaryTrialConfig,
};
pub use categorical::{
    all_pairs, categorical_trials, run_categorical_suite, run_categorical_trial,
    run_categorical_trials, CategoricalSuiteConfig, CategoricalTrialConfig, PairSelection,
};
pub use records::{load_records, persist_records, records_to_jsonl};
pub use summary::{Comparison, Metric, ModelSummary, SuiteKind, SuiteSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Binary cross-entropy, threshold 0.5.
    Control1,
    /// Control 1's network with the validation-best F1 threshold.
    Control2,
    /// Binary real-world-weight loss, threshold 0.5.
    Test,
    /// Categorical cross-entropy.
    Control,
    /// Categorical real-world-weight loss with one high-cost pair.
    Experimental,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Control1 => "Control 1",
            Model::Control2 => "Control 2",
            Model::Test => "Test",
            Model::Control => "Control",
            Model::Experimental => "Experimental",
        })
    }
}

/// The configuration a record was produced from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialConfig {
    Binary(BinaryTrialConfig),
    Categorical(CategoricalTrialConfig),
}

/// One trained model evaluated on its trial's test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trial: usize,
    pub model: Model,
    pub seed: u64,
    pub config: TrialConfig,
    pub test_examples: u64,
    pub errors: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_negatives: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_positives: Option<u64>,
    /// Test examples of the high-cost true class predicted as the high-cost class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high_cost_errors: Option<u64>,
    pub top1_error: f64,
    pub real_world_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Training plus evaluation time of the trial, shared by its records.
    pub wall_time_ms: u64,
}

impl RunRecord {
    /// The record with its timing zeroed, for reproducibility comparisons.
    pub fn untimed(&self) -> RunRecord {
        RunRecord {
            wall_time_ms: 0,
            ..self.clone()
        }
    }
}

/// All records of a suite, in trial order, with their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub records: Vec<RunRecord>,
    pub summary: SuiteSummary,
}

/// Network outputs for every row of `data`, computed in bounded-size chunks.
pub fn predict_dataset(mlp: &Mlp, data: &Dataset) -> Result<Matrix> {
    const CHUNK: usize = 2048;
    let rows: Vec<usize> = (0..data.len()).collect();
    let mut out = Vec::with_capacity(data.len() * mlp.output_dim());
    for chunk in rows.chunks(CHUNK) {
        out.extend_from_slice(mlp.predict(&data.features_for(chunk))?.as_slice());
    }
    Matrix::from_vec(data.len(), mlp.output_dim(), out)
}

/// Runs `trial` for every item on a pool of `jobs` threads; results keep item order.
pub(crate) fn run_parallel<T, F>(items: &[T], jobs: usize, trial: F) -> Result<Vec<RunRecord>>
where
    T: Sync,
    F: Fn(usize, &T) -> Result<Vec<RunRecord>> + Sync,
{
    if jobs == 0 {
        return Err(Error::Config("jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let per_trial: Vec<Vec<RunRecord>> = pool.install(|| {
        items
            .par_iter()
            .enumerate()
            .map(|(i, item)| trial(i, item))
            .collect::<Result<_>>()
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}

pub(crate) fn elapsed_ms(start: std::time::Instant) -> u64 {
    start.elapsed().as_millis().try_into().unwrap_or(u64::MAX)
}

/// Small learnable pools for tests: class `c` lights up its own band of pixels.
#[cfg(test)]
pub(crate) fn synthetic_pool(per_class: &[usize], seed: u64) -> crate::data::RawMnist {
    use crate::data::{idx, PIXELS};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut labels = Vec::new();
    for (class, &n) in per_class.iter().enumerate() {
        labels.extend(std::iter::repeat(class as u8).take(n));
    }
    let band = PIXELS / per_class.len();
    let mut pixels = Vec::with_capacity(labels.len() * PIXELS);
    for &label in &labels {
        for p in 0..PIXELS {
            let lit = p / band == label as usize;
            let base: u8 = if lit { 150 } else { 0 };
            pixels.push(base.saturating_add(rng.gen_range(0..100)));
        }
    }
    crate::data::RawMnist::from_idx(
        &idx::encode_images(labels.len(), &pixels),
        &idx::encode_labels(&labels),
    )
    .expect("synthetic pool encodes valid IDX")
}
