use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::summary::{SuiteKind, SuiteSummary};
use super::{
    elapsed_ms, predict_dataset, run_parallel, Model, RunRecord, SuiteOutcome, TrialConfig,
};
use crate::data::{make_binary_dataset, split, Dataset, RawMnist, DIGITS};
use crate::error::{Error, Result};
use crate::losses::{BinaryCostModel, LossSpec};
use crate::metrics::{best_f1_threshold, confusion_binary, f1, real_world_cost_binary};
use crate::nn::{init_mlp, train, Activation, LayerSpec, Mlp, TrainConfig};

/// Cost of a missed positive in the default setup.
pub const DEFAULT_FN_COST: f64 = 2000.0;
/// Cost of a false alarm in the default setup.
pub const DEFAULT_FP_COST: f64 = 100.0;
pub const HIDDEN_UNITS: usize = 10;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

fn default_cost() -> BinaryCostModel {
    BinaryCostModel {
        w_mcfn: DEFAULT_FN_COST,
        w_mcfp: DEFAULT_FP_COST,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryTrialConfig {
    pub digit: u8,
    pub slice_index: usize,
    /// Drives the split, the initialization and the batch order.
    pub seed: u64,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_cost")]
    pub cost: BinaryCostModel,
}

impl BinaryTrialConfig {
    pub fn new(digit: u8, slice_index: usize, seed: u64) -> Self {
        BinaryTrialConfig {
            digit,
            slice_index,
            seed,
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            cost: default_cost(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.digit as usize >= DIGITS {
            return Err(Error::Config(format!("digit {} is not 0-9", self.digit)));
        }
        self.train.validate()?;
        BinaryCostModel::new(self.cost.w_mcfn, self.cost.w_mcfp).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinarySuiteConfig {
    pub digits: Vec<u8>,
    pub slices: Vec<usize>,
    pub base_seed: u64,
    pub train: TrainConfig,
    pub cost: BinaryCostModel,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
}

impl Default for BinarySuiteConfig {
    /// Ten trials: every digit, first slice.
    fn default() -> Self {
        BinarySuiteConfig {
            digits: (0..DIGITS as u8).collect(),
            slices: vec![0],
            base_seed: 0,
            train: TrainConfig::default(),
            cost: default_cost(),
            jobs: 1,
        }
    }
}

impl BinarySuiteConfig {
    /// A hundred trials: every digit, slices 0-9.
    pub fn full() -> Self {
        BinarySuiteConfig {
            slices: (0..10).collect(),
            ..Self::default()
        }
    }
}

/// Trials in slice-major order; trial `i` gets seed `base_seed + i`.
pub fn binary_trials(cfg: &BinarySuiteConfig) -> Result<Vec<BinaryTrialConfig>> {
    if cfg.digits.is_empty() || cfg.slices.is_empty() {
        return Err(Error::Config(
            "suite needs at least one digit and one slice".into(),
        ));
    }
    let mut trials = Vec::with_capacity(cfg.digits.len() * cfg.slices.len());
    for &slice_index in &cfg.slices {
        for &digit in &cfg.digits {
            let seed = cfg.base_seed.wrapping_add(trials.len() as u64);
            let trial = BinaryTrialConfig {
                digit,
                slice_index,
                seed,
                train: TrainConfig { seed, ..cfg.train },
                cost: cfg.cost,
            };
            trial.validate()?;
            trials.push(trial);
        }
    }
    Ok(trials)
}

fn binary_network(input_dim: usize, seed: u64) -> Result<Mlp> {
    init_mlp(
        input_dim,
        &[
            LayerSpec::new(HIDDEN_UNITS, Activation::Relu),
            LayerSpec::new(1, Activation::Sigmoid),
        ],
        seed,
    )
}

/// Trains the cross-entropy and the real-world-weight networks from one
/// initialization and returns Control 1, Control 2 and Test records.
pub fn run_binary_trial(cfg: &BinaryTrialConfig, raw: &RawMnist) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let dataset = make_binary_dataset(raw, cfg.digit, cfg.slice_index)?;
    run_on_dataset(cfg, &dataset)
}

fn run_on_dataset(cfg: &BinaryTrialConfig, dataset: &Dataset) -> Result<Vec<RunRecord>> {
    let start = Instant::now();
    let parts = split(dataset, cfg.seed)?;
    let train_cfg = TrainConfig {
        seed: cfg.seed,
        ..cfg.train
    };
    let init = binary_network(dataset.input_dim(), cfg.seed)?;
    let control = train(init.clone(), &parts.train, &LossSpec::Bce, &train_cfg)?.mlp;
    let weighted = train(
        init,
        &parts.train,
        &LossSpec::RwwceBinary { cost: cfg.cost },
        &train_cfg,
    )?
    .mlp;

    let scores = |mlp: &Mlp, data: &Dataset| predict_dataset(mlp, data).map(|m| m.into_vec());
    let (control_val, control_test) = (
        scores(&control, &parts.validation)?,
        scores(&control, &parts.test)?,
    );
    let (weighted_val, weighted_test) = (
        scores(&weighted, &parts.validation)?,
        scores(&weighted, &parts.test)?,
    );
    let val_labels = parts.validation.labels();
    let test_labels = parts.test.labels();
    let val_f1_at =
        |s: &[f64], threshold: f64| confusion_binary(s, val_labels, threshold).map(|c| f1(&c));

    let tuned = best_f1_threshold(&control_val, val_labels)?;
    let mut records = vec![
        binary_record(
            cfg,
            Model::Control1,
            &control_test,
            test_labels,
            DEFAULT_THRESHOLD,
            val_f1_at(&control_val, DEFAULT_THRESHOLD)?,
        )?,
        binary_record(
            cfg,
            Model::Control2,
            &control_test,
            test_labels,
            tuned.threshold,
            tuned.f1,
        )?,
        binary_record(
            cfg,
            Model::Test,
            &weighted_test,
            test_labels,
            DEFAULT_THRESHOLD,
            val_f1_at(&weighted_val, DEFAULT_THRESHOLD)?,
        )?,
    ];
    let wall = elapsed_ms(start);
    for r in &mut records {
        r.wall_time_ms = wall;
    }
    Ok(records)
}

fn binary_record(
    cfg: &BinaryTrialConfig,
    model: Model,
    scores: &[f64],
    labels: &[u8],
    threshold: f64,
    validation_f1: f64,
) -> Result<RunRecord> {
    let c = confusion_binary(scores, labels, threshold)?;
    let n = c.total();
    Ok(RunRecord {
        trial: 0,
        model,
        seed: cfg.seed,
        config: TrialConfig::Binary(cfg.clone()),
        test_examples: n,
        errors: c.errors(),
        false_negatives: Some(c.fn_),
        false_positives: Some(c.fp),
        high_cost_errors: None,
        top1_error: c.error_rate(),
        real_world_cost: real_world_cost_binary(c.fn_ as f64, c.fp as f64, n as f64, &cfg.cost)?,
        f1: Some(f1(&c)),
        validation_f1: Some(validation_f1),
        threshold: Some(threshold),
        wall_time_ms: 0,
    })
}

/// Every trial of the suite, three records each, in trial order. Works for a single trial.
pub fn run_binary_trials(cfg: &BinarySuiteConfig, raw: &RawMnist) -> Result<Vec<RunRecord>> {
    let trials = binary_trials(cfg)?;
    run_parallel(&trials, cfg.jobs, |i, trial| {
        let mut records = run_binary_trial(trial, raw)?;
        records.iter_mut().for_each(|r| r.trial = i);
        Ok(records)
    })
}

pub fn run_binary_suite(cfg: &BinarySuiteConfig, raw: &RawMnist) -> Result<SuiteOutcome> {
    let n = binary_trials(cfg)?.len();
    if n < 2 {
        return Err(Error::Config(format!(
            "a suite needs at least 2 trials, got {n}"
        )));
    }
    let records = run_binary_trials(cfg, raw)?;
    let summary = SuiteSummary::from_records(SuiteKind::Binary, &records)?;
    Ok(SuiteOutcome { records, summary })
}
