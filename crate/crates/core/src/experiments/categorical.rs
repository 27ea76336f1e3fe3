use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::summary::{SuiteKind, SuiteSummary};
use super::{
    elapsed_ms, predict_dataset, run_parallel, Model, RunRecord, SuiteOutcome, TrialConfig,
};
use crate::data::{make_categorical_dataset, split, Dataset, RawMnist, DIGITS};
use crate::error::{Error, Result};
use crate::losses::{CategoricalCostModel, LossSpec};
use crate::metrics::{
    confusion_categorical, high_cost_pair_costs, real_world_cost_categorical, top1_error,
};
use crate::nn::{init_mlp, train, Activation, LayerSpec, Mlp, TrainConfig};

/// Extra cost of the high-cost mislabeling in the default setup.
pub const DEFAULT_PAIR_WEIGHT: f64 = 19.0;
/// Cost of every other mislabeling in the default setup.
pub const DEFAULT_BASE_WEIGHT: f64 = 1.0;
pub const HIDDEN_UNITS: [usize; 2] = [50, 20];

fn default_pair_weight() -> f64 {
    DEFAULT_PAIR_WEIGHT
}

fn default_base_weight() -> f64 {
    DEFAULT_BASE_WEIGHT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalTrialConfig {
    /// True class of the high-cost pair.
    pub fn_class: usize,
    /// Predicted class of the high-cost pair.
    pub fp_class: usize,
    pub seed: u64,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_pair_weight")]
    pub pair_fp_weight: f64,
    #[serde(default = "default_base_weight")]
    pub base_fn_weight: f64,
}

impl CategoricalTrialConfig {
    pub fn new(fn_class: usize, fp_class: usize, seed: u64) -> Self {
        CategoricalTrialConfig {
            fn_class,
            fp_class,
            seed,
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            pair_fp_weight: DEFAULT_PAIR_WEIGHT,
            base_fn_weight: DEFAULT_BASE_WEIGHT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.cost_model(DIGITS).map(|_| ())
    }

    fn cost_model(&self, classes: usize) -> Result<CategoricalCostModel> {
        CategoricalCostModel::high_cost_pair(
            classes,
            self.fn_class,
            self.fp_class,
            self.pair_fp_weight,
            self.base_fn_weight,
        )
    }
}

/// Which (true class, predicted class) pairs a suite runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSelection {
    All,
    /// A seeded sample without replacement from all ordered pairs.
    Random(usize),
    Explicit(Vec<(usize, usize)>),
}

impl FromStr for PairSelection {
    type Err = Error;

    /// `all`, `random:N`, or a comma-separated list like `1:2,7:1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse pair selection {s:?}"));
        if s == "all" {
            return Ok(PairSelection::All);
        }
        if let Some(n) = s.strip_prefix("random:") {
            return n.parse().map(PairSelection::Random).map_err(|_| bad());
        }
        s.split(',')
            .map(|pair| {
                let (k, kp) = pair.trim().split_once(':').ok_or_else(bad)?;
                Ok((
                    k.parse().map_err(|_| bad())?,
                    kp.parse().map_err(|_| bad())?,
                ))
            })
            .collect::<Result<_>>()
            .map(PairSelection::Explicit)
    }
}

impl fmt::Display for PairSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSelection::All => f.write_str("all"),
            PairSelection::Random(n) => write!(f, "random:{n}"),
            PairSelection::Explicit(pairs) => {
                let parts: Vec<_> = pairs.iter().map(|(a, b)| format!("{a}:{b}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Every ordered pair of distinct classes, true class major.
pub fn all_pairs(classes: usize) -> Vec<(usize, usize)> {
    (0..classes)
        .flat_map(|k| {
            (0..classes)
                .filter(move |&kp| kp != k)
                .map(move |kp| (k, kp))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategoricalSuiteConfig {
    pub pairs: PairSelection,
    pub base_seed: u64,
    pub train: TrainConfig,
    pub pair_fp_weight: f64,
    pub base_fn_weight: f64,
    pub jobs: usize,
}

impl Default for CategoricalSuiteConfig {
    /// Ten randomly drawn pairs.
    fn default() -> Self {
        CategoricalSuiteConfig {
            pairs: PairSelection::Random(10),
            base_seed: 0,
            train: TrainConfig::default(),
            pair_fp_weight: DEFAULT_PAIR_WEIGHT,
            base_fn_weight: DEFAULT_BASE_WEIGHT,
            jobs: 1,
        }
    }
}

impl CategoricalSuiteConfig {
    /// All 90 ordered pairs.
    pub fn full() -> Self {
        CategoricalSuiteConfig {
            pairs: PairSelection::All,
            ..Self::default()
        }
    }
}

/// Trials in selection order; trial `i` gets seed `base_seed + i`. Random
/// selections are drawn with `base_seed`.
pub fn categorical_trials(cfg: &CategoricalSuiteConfig) -> Result<Vec<CategoricalTrialConfig>> {
    let pairs = match &cfg.pairs {
        PairSelection::All => all_pairs(DIGITS),
        PairSelection::Random(count) => {
            let mut pool = all_pairs(DIGITS);
            if *count == 0 || *count > pool.len() {
                return Err(Error::Config(format!(
                    "random pair count must be 1-{}, got {count}",
                    pool.len()
                )));
            }
            pool.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.base_seed));
            pool.truncate(*count);
            pool
        }
        PairSelection::Explicit(pairs) if pairs.is_empty() => {
            return Err(Error::Config("no pairs selected".into()))
        }
        PairSelection::Explicit(pairs) => pairs.clone(),
    };
    pairs
        .into_iter()
        .enumerate()
        .map(|(i, (k, kp))| {
            let seed = cfg.base_seed.wrapping_add(i as u64);
            let trial = CategoricalTrialConfig {
                fn_class: k,
                fp_class: kp,
                seed,
                train: TrainConfig { seed, ..cfg.train },
                pair_fp_weight: cfg.pair_fp_weight,
                base_fn_weight: cfg.base_fn_weight,
            };
            trial.validate()?;
            Ok(trial)
        })
        .collect()
}

fn categorical_network(input_dim: usize, classes: usize, seed: u64) -> Result<Mlp> {
    init_mlp(
        input_dim,
        &[
            LayerSpec::new(HIDDEN_UNITS[0], Activation::Relu),
            LayerSpec::new(HIDDEN_UNITS[1], Activation::Relu),
            LayerSpec::new(classes, Activation::Softmax),
        ],
        seed,
    )
}

/// Trains the cross-entropy and the high-cost-pair networks from one
/// initialization and returns Control and Experimental records.
pub fn run_categorical_trial(
    cfg: &CategoricalTrialConfig,
    raw: &RawMnist,
) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    run_on_dataset(cfg, &make_categorical_dataset(raw))
}

fn run_on_dataset(cfg: &CategoricalTrialConfig, dataset: &Dataset) -> Result<Vec<RunRecord>> {
    let start = Instant::now();
    let classes = dataset
        .classes()
        .ok_or_else(|| Error::Input("high-cost pair trials need a categorical dataset".into()))?;
    let cost = cfg.cost_model(classes)?;
    let parts = split(dataset, cfg.seed)?;
    let train_cfg = TrainConfig {
        seed: cfg.seed,
        ..cfg.train
    };
    let init = categorical_network(dataset.input_dim(), classes, cfg.seed)?;
    let control = train(init.clone(), &parts.train, &LossSpec::Cce, &train_cfg)?.mlp;
    let weighted = train(
        init,
        &parts.train,
        &LossSpec::RwwceCategorical { cost },
        &train_cfg,
    )?
    .mlp;

    let error_costs = high_cost_pair_costs(
        classes,
        cfg.fn_class,
        cfg.fp_class,
        cfg.base_fn_weight,
        cfg.pair_fp_weight,
    );
    let targets = parts.test.targets();
    let evaluate = |model: Model, mlp: &Mlp| -> Result<RunRecord> {
        let cm = confusion_categorical(&predict_dataset(mlp, &parts.test)?, &targets)?;
        Ok(RunRecord {
            trial: 0,
            model,
            seed: cfg.seed,
            config: TrialConfig::Categorical(cfg.clone()),
            test_examples: cm.total(),
            errors: cm.errors(),
            false_negatives: None,
            false_positives: None,
            high_cost_errors: Some(cm.get(cfg.fn_class, cfg.fp_class)),
            top1_error: top1_error(&cm)?,
            real_world_cost: real_world_cost_categorical(&cm.tallies(), &error_costs)?,
            f1: None,
            validation_f1: None,
            threshold: None,
            wall_time_ms: 0,
        })
    };
    let mut records = vec![
        evaluate(Model::Control, &control)?,
        evaluate(Model::Experimental, &weighted)?,
    ];
    let wall = elapsed_ms(start);
    for r in &mut records {
        r.wall_time_ms = wall;
    }
    Ok(records)
}

/// Every trial of the suite, two records each, in trial order. Works for a single pair.
pub fn run_categorical_trials(
    cfg: &CategoricalSuiteConfig,
    raw: &RawMnist,
) -> Result<Vec<RunRecord>> {
    let trials = categorical_trials(cfg)?;
    let dataset = make_categorical_dataset(raw);
    run_parallel(&trials, cfg.jobs, |i, trial| {
        trial.validate()?;
        let mut records = run_on_dataset(trial, &dataset)?;
        records.iter_mut().for_each(|r| r.trial = i);
        Ok(records)
    })
}

pub fn run_categorical_suite(cfg: &CategoricalSuiteConfig, raw: &RawMnist) -> Result<SuiteOutcome> {
    let n = categorical_trials(cfg)?.len();
    if n < 2 {
        return Err(Error::Config(format!(
            "a suite needs at least 2 pairs, got {n}"
        )));
    }
    let records = run_categorical_trials(cfg, raw)?;
    let summary = SuiteSummary::from_records(SuiteKind::Categorical, &records)?;
    Ok(SuiteOutcome { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::synthetic_pool;

    fn quick(k: usize, kp: usize, seed: u64, pair_weight: f64) -> CategoricalTrialConfig {
        CategoricalTrialConfig {
            train: TrainConfig {
                epochs: 2,
                batch_size: 20,
                seed,
                ..TrainConfig::default()
            },
            pair_fp_weight: pair_weight,
            ..CategoricalTrialConfig::new(k, kp, seed)
        }
    }

    #[test]
    fn pair_enumeration() {
        let pairs = all_pairs(10);
        assert_eq!(pairs.len(), 90);
        let unique: std::collections::HashSet<_> = pairs.iter().collect();
        assert_eq!(unique.len(), 90);
        assert!(pairs.iter().all(|(k, kp)| k != kp && *k < 10 && *kp < 10));
    }

    #[test]
    fn selection_parsing() {
        assert_eq!("all".parse::<PairSelection>().unwrap(), PairSelection::All);
        assert_eq!(
            "random:7".parse::<PairSelection>().unwrap(),
            PairSelection::Random(7)
        );
        assert_eq!(
            "1:2".parse::<PairSelection>().unwrap(),
            PairSelection::Explicit(vec![(1, 2)])
        );
        assert_eq!(
            "1:2, 3:0".parse::<PairSelection>().unwrap().to_string(),
            "1:2,3:0"
        );
        for bad in ["", "1", "1-2", "random:x", "a:b"] {
            assert!(bad.parse::<PairSelection>().is_err(), "{bad}");
        }
    }

    #[test]
    fn random_selection_is_seeded() {
        let cfg = CategoricalSuiteConfig::default();
        let a = categorical_trials(&cfg).unwrap();
        assert_eq!(a, categorical_trials(&cfg).unwrap());
        assert_eq!(a.len(), 10);
        let other = categorical_trials(&CategoricalSuiteConfig {
            base_seed: 1,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a, other);
        let same_pair = CategoricalSuiteConfig {
            pairs: PairSelection::Explicit(vec![(3, 3)]),
            ..cfg
        };
        assert!(categorical_trials(&same_pair).is_err());
    }

    #[test]
    fn records_carry_pair_counts() {
        let pool = synthetic_pool(&[40; 10], 2);
        let records = run_categorical_trial(&quick(1, 2, 4, 19.0), &pool).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].model, Model::Control);
        assert_eq!(records[1].model, Model::Experimental);
        for r in &records {
            assert_eq!(r.test_examples, 100);
            assert!(r.high_cost_errors.unwrap() <= r.errors);
        }
    }

    #[test]
    fn zero_pair_weight_reproduces_control() {
        let pool = synthetic_pool(&[40; 10], 3);
        let records = run_categorical_trial(&quick(4, 9, 8, 0.0), &pool).unwrap();
        let control = RunRecord {
            model: Model::Experimental,
            ..records[0].clone()
        };
        assert_eq!(records[1], control);
    }
}
