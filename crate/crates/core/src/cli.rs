//! Command-line front end. Every command resolves its settings as built-in
//! defaults, then an optional JSON config file, then flags, and prints the
//! resolved config before doing any work.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bernoulli::{
    analytic_minimizer, descend, likelihood_check, loss_curve, uniform_grid, BernoulliScenario,
};
use crate::data::{default_data_dir, MnistFiles, RawMnist};
use crate::error::{Error, Result};
use crate::experiments::{
    persist_records, run_binary_trials, run_categorical_trials, BinarySuiteConfig,
    CategoricalSuiteConfig, PairSelection, RunRecord, SuiteKind, SuiteSummary,
};
use crate::losses::BinaryCostModel;
use crate::nn::{check_all_losses, TrainConfig};

#[derive(Debug, Parser)]
#[command(
    name = "rwwce",
    version,
    about = "Real-world-weighted cross-entropy experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the four MNIST files and report the pooled example count.
    VerifyData(VerifyArgs),
    /// Binary-imbalance suite: cross-entropy, tuned threshold, and real-world weights.
    RunBinary(BinaryArgs),
    /// High-cost-pair suite over ordered digit pairs.
    RunCategorical(CategoricalArgs),
    /// Weighted coin-flip estimate: closed form, gradient descent, likelihood check.
    Bernoulli(BernoulliArgs),
    /// Finite-difference check of every loss's backpropagated gradients.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Directory holding the standard file names [default: $RWWCE_DATA_DIR or data/mnist]
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub train_images: Option<PathBuf>,
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

impl TrainArgs {
    fn apply(&self, train: &mut TrainConfig) {
        if let Some(v) = self.epochs {
            train.epochs = v;
        }
        if let Some(v) = self.batch_size {
            train.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            train.learning_rate = v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Ten trials.
    Desk,
    /// 100 binary trials or all 90 pairs.
    Full,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// JSON file with any subset of the resolved config's fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Base seed; trial i uses base + i
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on it)
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// [default: $RWWCE_DATA_DIR or data/mnist]
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct BinaryArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    /// Digits as a range or list, e.g. 0-9 or 1,4,7
    #[arg(long, value_parser = parse_u8_list)]
    pub digits: Option<NumberList<u8>>,
    /// Slice indices as a range or list
    #[arg(long, value_parser = parse_usize_list)]
    pub slices: Option<NumberList<usize>>,
    /// Cost of a false negative
    #[arg(long)]
    pub w_fn: Option<f64>,
    /// Cost of a false positive
    #[arg(long)]
    pub w_fp: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CategoricalArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    /// all, random:N, or true:predicted pairs such as 1:2,7:1
    #[arg(long)]
    pub pairs: Option<PairSelection>,
    /// Extra cost of the high-cost mislabeling
    #[arg(long)]
    pub pair_weight: Option<f64>,
    /// Cost of every mislabeling
    #[arg(long)]
    pub base_weight: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BernoulliArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_pos: Option<u64>,
    #[arg(long)]
    pub n_neg: Option<u64>,
    #[arg(long)]
    pub w_pos: Option<f64>,
    #[arg(long)]
    pub w_neg: Option<f64>,
    /// Starting point of gradient descent
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Write the loss curve as CSV (p,loss)
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Number of evenly spaced curve points
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random networks and batches per loss
    #[arg(long)]
    pub instances: Option<usize>,
    /// Finite-difference step
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinaryRunConfig {
    pub data_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub suite: BinarySuiteConfig,
}

impl Default for BinaryRunConfig {
    fn default() -> Self {
        BinaryRunConfig {
            data_dir: None,
            out_dir: PathBuf::from("runs/binary"),
            suite: BinarySuiteConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategoricalRunConfig {
    pub data_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub suite: CategoricalSuiteConfig,
}

impl Default for CategoricalRunConfig {
    fn default() -> Self {
        CategoricalRunConfig {
            data_dir: None,
            out_dir: PathBuf::from("runs/categorical"),
            suite: CategoricalSuiteConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BernoulliConfig {
    pub n_pos: u64,
    pub n_neg: u64,
    pub w_pos: f64,
    pub w_neg: f64,
    pub p0: f64,
    pub step: f64,
    pub iterations: usize,
    pub curve: Option<PathBuf>,
    pub grid: usize,
}

impl Default for BernoulliConfig {
    /// One head worth 9, one tail worth 1.
    fn default() -> Self {
        BernoulliConfig {
            n_pos: 1,
            n_neg: 1,
            w_pos: 9.0,
            w_neg: 1.0,
            p0: 0.5,
            step: 0.01,
            iterations: 100_000,
            curve: None,
            grid: 999,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckConfig {
    pub seed: u64,
    pub instances: usize,
    pub step: f64,
    pub tolerance: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        GradcheckConfig {
            seed: 1,
            instances: 100,
            step: 1e-5,
            tolerance: 1e-5,
        }
    }
}

/// Parsed `a-b` or `a,b,c` flag value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberList<T>(pub Vec<T>);

/// `a-b` (inclusive) or a comma-separated list.
fn parse_list<T>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T: std::str::FromStr + Copy + Into<u64> + TryFrom<u64>,
{
    let num = |t: &str| {
        t.trim()
            .parse::<T>()
            .map_err(|_| format!("{t:?} is not a valid number"))
    };
    if let Some((lo, hi)) = s.split_once('-') {
        let (lo, hi) = (num(lo)?.into(), num(hi)?.into());
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        return (lo..=hi)
            .map(|v| T::try_from(v).map_err(|_| format!("{v} out of range")))
            .collect();
    }
    s.split(',').map(num).collect()
}

fn parse_u8_list(s: &str) -> std::result::Result<NumberList<u8>, String> {
    parse_list::<u8>(s).map(NumberList)
}

fn parse_usize_list(s: &str) -> std::result::Result<NumberList<usize>, String> {
    parse_list::<u32>(s).map(|v| NumberList(v.into_iter().map(|x| x as usize).collect()))
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
}

fn echo<T: Serialize>(config: &T) -> Result<String> {
    let text = serde_json::to_string_pretty(config)?;
    println!("resolved config:\n{text}");
    Ok(text)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl SuiteArgs {
    fn apply(
        &self,
        data_dir: &mut Option<PathBuf>,
        out_dir: &mut PathBuf,
        seed: &mut u64,
        jobs: &mut usize,
        train: &mut TrainConfig,
    ) {
        if let Some(d) = &self.data_dir {
            *data_dir = Some(d.clone());
        }
        if let Some(d) = &self.out_dir {
            *out_dir = d.clone();
        }
        if let Some(s) = self.seed {
            *seed = s;
        }
        if let Some(j) = self.jobs {
            *jobs = j;
        }
        self.train.apply(train);
    }
}

pub fn resolve_binary(args: &BinaryArgs) -> Result<BinaryRunConfig> {
    let mut cfg: BinaryRunConfig = load_config(args.suite.config.as_deref())?;
    match args.suite.preset {
        Some(Preset::Full) => {
            let full = BinarySuiteConfig::full();
            cfg.suite.digits = full.digits;
            cfg.suite.slices = full.slices;
        }
        Some(Preset::Desk) => {
            let desk = BinarySuiteConfig::default();
            cfg.suite.digits = desk.digits;
            cfg.suite.slices = desk.slices;
        }
        None => {}
    }
    let s = &mut cfg.suite;
    args.suite.apply(
        &mut cfg.data_dir,
        &mut cfg.out_dir,
        &mut s.base_seed,
        &mut s.jobs,
        &mut s.train,
    );
    if let Some(d) = &args.digits {
        s.digits = d.0.clone();
    }
    if let Some(v) = &args.slices {
        s.slices = v.0.clone();
    }
    s.cost = BinaryCostModel::new(
        args.w_fn.unwrap_or(s.cost.w_mcfn),
        args.w_fp.unwrap_or(s.cost.w_mcfp),
    )?;
    crate::experiments::binary_trials(s)?;
    if s.jobs == 0 {
        return Err(Error::Config("jobs must be at least 1".into()));
    }
    Ok(cfg)
}

pub fn resolve_categorical(args: &CategoricalArgs) -> Result<CategoricalRunConfig> {
    let mut cfg: CategoricalRunConfig = load_config(args.suite.config.as_deref())?;
    match args.suite.preset {
        Some(Preset::Full) => cfg.suite.pairs = CategoricalSuiteConfig::full().pairs,
        Some(Preset::Desk) => cfg.suite.pairs = CategoricalSuiteConfig::default().pairs,
        None => {}
    }
    let s = &mut cfg.suite;
    args.suite.apply(
        &mut cfg.data_dir,
        &mut cfg.out_dir,
        &mut s.base_seed,
        &mut s.jobs,
        &mut s.train,
    );
    if let Some(p) = &args.pairs {
        s.pairs = p.clone();
    }
    if let Some(w) = args.pair_weight {
        s.pair_fp_weight = w;
    }
    if let Some(w) = args.base_weight {
        s.base_fn_weight = w;
    }
    crate::experiments::categorical_trials(s)?;
    if s.jobs == 0 {
        return Err(Error::Config("jobs must be at least 1".into()));
    }
    Ok(cfg)
}

pub fn resolve_bernoulli(args: &BernoulliArgs) -> Result<BernoulliConfig> {
    let mut c: BernoulliConfig = load_config(args.config.as_deref())?;
    c.n_pos = args.n_pos.unwrap_or(c.n_pos);
    c.n_neg = args.n_neg.unwrap_or(c.n_neg);
    c.w_pos = args.w_pos.unwrap_or(c.w_pos);
    c.w_neg = args.w_neg.unwrap_or(c.w_neg);
    c.p0 = args.p0.unwrap_or(c.p0);
    c.step = args.step.unwrap_or(c.step);
    c.iterations = args.iterations.unwrap_or(c.iterations);
    c.grid = args.grid.unwrap_or(c.grid);
    if args.curve.is_some() {
        c.curve = args.curve.clone();
    }
    BernoulliScenario::new(c.n_pos, c.n_neg, c.w_pos, c.w_neg)?;
    if !(c.p0 > 0.0 && c.p0 < 1.0) || !(c.step > 0.0) || c.grid == 0 {
        return Err(Error::Config(
            "need 0 < p0 < 1, step > 0 and a nonempty grid".into(),
        ));
    }
    Ok(c)
}

pub fn resolve_gradcheck(args: &GradcheckArgs) -> Result<GradcheckConfig> {
    let mut c: GradcheckConfig = load_config(args.config.as_deref())?;
    c.seed = args.seed.unwrap_or(c.seed);
    c.instances = args.instances.unwrap_or(c.instances);
    c.step = args.step.unwrap_or(c.step);
    c.tolerance = args.tolerance.unwrap_or(c.tolerance);
    if c.instances == 0 || !(c.step > 0.0) || !(c.tolerance > 0.0) {
        return Err(Error::Config(
            "need instances ≥ 1, step > 0 and tolerance > 0".into(),
        ));
    }
    Ok(c)
}

fn load_pool(data_dir: Option<&Path>) -> Result<RawMnist> {
    let dir = data_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(default_data_dir);
    MnistFiles::in_dir(&dir).load()
}

fn write_suite_outputs(
    out_dir: &Path,
    config_json: &str,
    kind: SuiteKind,
    records: &[RunRecord],
) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_file(&out_dir.join("config.json"), config_json)?;
    persist_records(records, &out_dir.join("records.jsonl"))?;
    let summary = SuiteSummary::from_records(kind, records)?;
    write_file(&out_dir.join("summary.csv"), &summary.to_csv()?)?;
    print!("\n{}", summary.to_table());
    println!("\nwrote {}", out_dir.display());
    Ok(())
}

fn cmd_verify_data(args: &VerifyArgs) -> Result<()> {
    let dir = args.data_dir.clone().unwrap_or_else(default_data_dir);
    let mut files = MnistFiles::in_dir(&dir);
    for (slot, over) in [
        (&mut files.train_images, &args.train_images),
        (&mut files.train_labels, &args.train_labels),
        (&mut files.test_images, &args.test_images),
        (&mut files.test_labels, &args.test_labels),
    ] {
        if let Some(p) = over {
            *slot = p.clone();
        }
    }
    echo(&files)?;
    let pool = files.load()?;
    let counts = pool.class_counts();
    let classes = counts.iter().filter(|&&c| c > 0).count();
    println!("{} examples, {classes} classes", pool.len());
    let per_class: Vec<String> = counts
        .iter()
        .enumerate()
        .map(|(d, c)| format!("{d}:{c}"))
        .collect();
    println!("per digit: {}", per_class.join(" "));
    Ok(())
}

fn cmd_run_binary(args: &BinaryArgs) -> Result<()> {
    let cfg = resolve_binary(args)?;
    let json = echo(&cfg)?;
    let pool = load_pool(cfg.data_dir.as_deref())?;
    let trials = cfg.suite.digits.len() * cfg.suite.slices.len();
    println!("running {trials} trials on {} thread(s)", cfg.suite.jobs);
    let records = run_binary_trials(&cfg.suite, &pool)?;
    write_suite_outputs(&cfg.out_dir, &json, SuiteKind::Binary, &records)
}

fn cmd_run_categorical(args: &CategoricalArgs) -> Result<()> {
    let cfg = resolve_categorical(args)?;
    let json = echo(&cfg)?;
    let pool = load_pool(cfg.data_dir.as_deref())?;
    let trials = crate::experiments::categorical_trials(&cfg.suite)?.len();
    println!("running {trials} trials on {} thread(s)", cfg.suite.jobs);
    let records = run_categorical_trials(&cfg.suite, &pool)?;
    write_suite_outputs(&cfg.out_dir, &json, SuiteKind::Categorical, &records)
}

fn cmd_bernoulli(args: &BernoulliArgs) -> Result<()> {
    let c = resolve_bernoulli(args)?;
    echo(&c)?;
    let s = BernoulliScenario::new(c.n_pos, c.n_neg, c.w_pos, c.w_neg)?;
    let best = analytic_minimizer(&s)?;
    let descended = descend(&s, c.p0, c.step, c.iterations)?;
    let check = likelihood_check(&s)?;
    println!("analytic minimizer: {best}");
    println!(
        "gradient descent from {} after {} steps: {descended}",
        c.p0, c.iterations
    );
    println!(
        "likelihood maximizer: {} (differs by {:.3e})",
        check.likelihood_argmax,
        check.discrepancy()
    );
    if let Some(path) = &c.curve {
        let curve = loss_curve(&s, &uniform_grid(c.grid))?;
        curve.write_csv(path)?;
        println!(
            "wrote {} points (normalizer {}) to {}",
            curve.points.len(),
            curve.normalizer,
            path.display()
        );
    }
    Ok(())
}

fn cmd_gradcheck(args: &GradcheckArgs) -> Result<()> {
    let c = resolve_gradcheck(args)?;
    echo(&c)?;
    let checks = check_all_losses(c.seed, c.instances, c.step, c.tolerance)?;
    let mut failed = Vec::new();
    for check in &checks {
        println!(
            "{:<18} {:>4} instances  worst relative error {:.3e}  {}",
            check.loss,
            check.instances,
            check.worst.max_relative_error,
            if check.passed() { "PASS" } else { "FAIL" }
        );
        if !check.passed() {
            failed.push(check.loss);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Degenerate(format!(
            "gradient check failed for {}",
            failed.join(", ")
        )))
    }
}

/// 1 for problems with the request itself, 2 for failures while running it.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Topology(_) | Error::Incompatible { .. } => 1,
        _ => 2,
    }
}

pub fn run_command(command: &Command) -> Result<()> {
    match command {
        Command::VerifyData(a) => cmd_verify_data(a),
        Command::RunBinary(a) => cmd_run_binary(a),
        Command::RunCategorical(a) => cmd_run_categorical(a),
        Command::Bernoulli(a) => cmd_bernoulli(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run_command(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("rwwce").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn list_parsing() {
        assert_eq!(
            parse_u8_list("0-9").unwrap().0,
            (0..10).collect::<Vec<u8>>()
        );
        assert_eq!(parse_u8_list("1,4,7").unwrap().0, vec![1, 4, 7]);
        assert_eq!(parse_usize_list("3").unwrap().0, vec![3]);
        assert!(parse_u8_list("5-2").is_err());
        assert!(parse_u8_list("x").is_err());
    }

    #[test]
    fn binary_defaults_and_flags() {
        let Command::RunBinary(a) = parse(&["run-binary"]) else {
            panic!()
        };
        let cfg = resolve_binary(&a).unwrap();
        assert_eq!(
            (cfg.suite.cost.w_mcfn, cfg.suite.cost.w_mcfp),
            (2000.0, 100.0)
        );
        assert_eq!(
            (cfg.suite.train.epochs, cfg.suite.train.batch_size),
            (10, 100)
        );
        assert_eq!(cfg.suite.digits.len() * cfg.suite.slices.len(), 10);

        let Command::RunBinary(a) = parse(&[
            "run-binary",
            "--digits",
            "0-9",
            "--slices",
            "0",
            "--seed",
            "42",
            "--w-fn",
            "1",
            "--w-fp",
            "1",
            "--epochs",
            "3",
        ]) else {
            panic!()
        };
        let cfg = resolve_binary(&a).unwrap();
        assert_eq!(cfg.suite.base_seed, 42);
        assert_eq!(cfg.suite.cost, BinaryCostModel::new(1.0, 1.0).unwrap());
        assert_eq!(cfg.suite.train.epochs, 3);

        let Command::RunBinary(a) = parse(&["run-binary", "--preset", "full"]) else {
            panic!()
        };
        assert_eq!(resolve_binary(&a).unwrap().suite.slices.len(), 10);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"suite": {"base_seed": 7, "pairs": "all", "train": {"epochs": 2}}}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let Command::RunCategorical(a) = parse(&["run-categorical", "--config", p]) else {
            panic!()
        };
        let cfg = resolve_categorical(&a).unwrap();
        assert_eq!((cfg.suite.base_seed, cfg.suite.train.epochs), (7, 2));
        assert_eq!(cfg.suite.pairs, PairSelection::All);
        assert_eq!(cfg.suite.pair_fp_weight, 19.0);

        let Command::RunCategorical(a) = parse(&[
            "run-categorical",
            "--config",
            p,
            "--seed",
            "9",
            "--pairs",
            "1:2",
        ]) else {
            panic!()
        };
        let cfg = resolve_categorical(&a).unwrap();
        assert_eq!(cfg.suite.base_seed, 9);
        assert_eq!(cfg.suite.pairs, PairSelection::Explicit(vec![(1, 2)]));

        std::fs::write(&path, r#"{"suite": {"seed": 7}}"#).unwrap();
        let Command::RunCategorical(a) = parse(&["run-categorical", "--config", p]) else {
            panic!()
        };
        let err = resolve_categorical(&a).unwrap_err();
        assert_eq!(exit_code(&err), 1);
    }

    #[test]
    fn echoed_config_reloads() {
        let Command::RunBinary(a) = parse(&["run-binary", "--digits", "2,3", "--seed", "5"]) else {
            panic!()
        };
        let cfg = resolve_binary(&a).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("echo.json");
        std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        let Command::RunBinary(b) = parse(&["run-binary", "--config", path.to_str().unwrap()])
        else {
            panic!()
        };
        assert_eq!(resolve_binary(&b).unwrap(), cfg);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for args in [
            &["run-binary", "--digits", "12"][..],
            &["run-binary", "--w-fn", "0", "--w-fp", "0"],
            &["run-binary", "--jobs", "0"],
            &["run-categorical", "--pairs", "4:4"],
        ] {
            let err = match parse(args) {
                Command::RunBinary(a) => resolve_binary(&a).unwrap_err(),
                Command::RunCategorical(a) => resolve_categorical(&a).unwrap_err(),
                _ => unreachable!(),
            };
            assert_eq!(exit_code(&err), 1, "{args:?}: {err}");
        }
    }

    #[test]
    fn bernoulli_and_gradcheck_defaults() {
        let Command::Bernoulli(a) = parse(&["bernoulli"]) else {
            panic!()
        };
        let c = resolve_bernoulli(&a).unwrap();
        assert_eq!((c.n_pos, c.n_neg, c.w_pos, c.w_neg), (1, 1, 9.0, 1.0));
        let Command::Gradcheck(a) = parse(&["gradcheck", "--seed", "3"]) else {
            panic!()
        };
        let c = resolve_gradcheck(&a).unwrap();
        assert_eq!(
            (c.seed, c.instances, c.step, c.tolerance),
            (3, 100, 1e-5, 1e-5)
        );
    }
}
