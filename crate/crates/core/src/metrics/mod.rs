//! Evaluation: confusion tallies, F1 and its threshold search, real world cost,
//! top-1 error and the paired t-test.

mod stats;

pub use stats::{paired_t_test, student_t_two_sided, TTestResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{one_hot_classes, BinaryCostModel};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn errors(&self) -> u64 {
        self.fp + self.fn_
    }

    /// Fraction of misclassified examples.
    pub fn error_rate(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.errors() as f64 / n as f64,
        }
    }
}

fn check_scores(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::Input("no examples to evaluate".into()));
    }
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Input(format!("binary label {bad}")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Input("NaN score".into()));
    }
    Ok(())
}

/// Tallies predictions `score > threshold` against binary labels.
pub fn confusion_binary(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ConfusionCounts> {
    check_scores(scores, labels)?;
    let mut c = ConfusionCounts::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s > threshold, l == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// `2·tp / (2·tp + fp + fn)`, or 0 when nothing was predicted or present.
pub fn f1(counts: &ConfusionCounts) -> f64 {
    let denom = 2 * counts.tp + counts.fp + counts.fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * counts.tp) as f64 / denom as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub f1: f64,
}

/// Threshold just below `lo` or `hi`, keeping readable values for ordinary scores.
fn below(v: f64) -> f64 {
    if v - 1.0 < v {
        v - 1.0
    } else {
        v.next_down()
    }
}

fn above(v: f64) -> f64 {
    if v + 1.0 > v {
        v + 1.0
    } else {
        v.next_up()
    }
}

/// Every threshold that can change the prediction set, in increasing order:
/// one below the smallest score, the midpoint of each pair of consecutive
/// distinct scores, and one above the largest score.
pub fn candidate_thresholds(scores: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.iter().copied().filter(|s| !s.is_nan()).collect();
    if distinct.is_empty() {
        return Vec::new();
    }
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut out = Vec::with_capacity(distinct.len() + 1);
    out.push(below(distinct[0]));
    for w in distinct.windows(2) {
        let mid = w[0] + (w[1] - w[0]) / 2.0;
        // adjacent floats can round the midpoint onto the upper score
        out.push(if mid > w[0] && mid < w[1] { mid } else { w[0] });
    }
    out.push(above(distinct[distinct.len() - 1]));
    out
}

/// Exhaustive F1-maximizing threshold over [`candidate_thresholds`]; ties go to the larger threshold.
pub fn best_f1_threshold(scores: &[f64], labels: &[u8]) -> Result<ThresholdChoice> {
    check_scores(scores, labels)?;
    let thresholds = candidate_thresholds(scores);

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let positives = labels.iter().filter(|&&l| l == 1).count() as u64;
    let negatives = labels.len() as u64 - positives;

    // Walk thresholds upward; everything at or below the threshold becomes negative.
    let mut counts = ConfusionCounts {
        tp: positives,
        fp: negatives,
        tn: 0,
        fn_: 0,
    };
    let mut next = 0;
    let mut best = ThresholdChoice {
        threshold: f64::NAN,
        f1: -1.0,
    };
    for &t in &thresholds {
        while next < order.len() && scores[order[next]] <= t {
            if labels[order[next]] == 1 {
                counts.tp -= 1;
                counts.fn_ += 1;
            } else {
                counts.fp -= 1;
                counts.tn += 1;
            }
            next += 1;
        }
        let score = f1(&counts);
        if score >= best.f1 {
            best = ThresholdChoice {
                threshold: t,
                f1: score,
            };
        }
    }
    Ok(best)
}

/// Currency cost per sample: `(w_mcfn·fn + w_mcfp·fp) / n`. Counts may be
/// fractional so that averaged tallies can be costed.
pub fn real_world_cost_binary(
    false_negatives: f64,
    false_positives: f64,
    n: f64,
    cost: &BinaryCostModel,
) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Input(format!(
            "sample count must be positive, got {n}"
        )));
    }
    if false_negatives < 0.0 || false_positives < 0.0 {
        return Err(Error::Input("error counts must be nonnegative".into()));
    }
    Ok((cost.w_mcfn * false_negatives + cost.w_mcfp * false_positives) / n)
}

/// K×K counts; entry (k, k') is the number of examples of class k predicted as k'.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_predictions(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Shape(format!(
                "{} true classes for {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        if truth.is_empty() {
            return Err(Error::Input("no examples to evaluate".into()));
        }
        let mut counts = vec![0; classes * classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= classes || p >= classes {
                return Err(Error::Input(format!(
                    "class index out of range for {classes} classes"
                )));
            }
            counts[t * classes + p] += 1;
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, true_class: usize, predicted_class: usize) -> u64 {
        self.counts[true_class * self.classes + predicted_class]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }

    pub fn errors(&self) -> u64 {
        self.total() - self.trace()
    }

    pub fn is_diagonal(&self) -> bool {
        self.trace() == self.total()
    }

    pub fn tallies(&self) -> Matrix {
        Matrix::from_vec(
            self.classes,
            self.classes,
            self.counts.iter().map(|&c| c as f64).collect(),
        )
        .expect("square by construction")
    }
}

/// Argmax predictions (ties to the lowest class) against one-hot targets.
pub fn confusion_categorical(probabilities: &Matrix, targets: &Matrix) -> Result<ConfusionMatrix> {
    if probabilities.shape() != targets.shape() {
        return Err(Error::Shape(format!(
            "predictions {:?} vs targets {:?}",
            probabilities.shape(),
            targets.shape()
        )));
    }
    let truth = one_hot_classes(targets)?;
    ConfusionMatrix::from_predictions(&truth, &probabilities.argmax_rows(), probabilities.cols())
}

/// `Σ_{k≠k'} tallies(k,k')·cost(k,k') / Σ tallies`. Tallies may be fractional.
pub fn real_world_cost_categorical(tallies: &Matrix, cost_per_error: &Matrix) -> Result<f64> {
    let k = tallies.rows();
    if tallies.shape() != (k, k) || cost_per_error.shape() != (k, k) {
        return Err(Error::Shape(format!(
            "tallies {:?} and costs {:?} must be the same square shape",
            tallies.shape(),
            cost_per_error.shape()
        )));
    }
    if (0..k).any(|i| cost_per_error[(i, i)] != 0.0) {
        return Err(Error::Input(
            "correct predictions must cost nothing (nonzero diagonal)".into(),
        ));
    }
    let total: f64 = tallies.as_slice().iter().sum();
    if !(total > 0.0) {
        return Err(Error::Input("no examples to evaluate".into()));
    }
    let mut cost = 0.0;
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            cost += tallies[(i, j)] * cost_per_error[(i, j)];
        }
    }
    Ok(cost / total)
}

/// Cost matrix charging `base` for every error and `base + extra` for the pair (true_class, predicted_class).
pub fn high_cost_pair_costs(
    classes: usize,
    true_class: usize,
    predicted_class: usize,
    base: f64,
    extra: f64,
) -> Matrix {
    let mut m = Matrix::zeros(classes, classes);
    for i in 0..classes {
        for j in (0..classes).filter(|&j| j != i) {
            m[(i, j)] = base;
        }
    }
    m[(true_class, predicted_class)] = base + extra;
    m
}

pub fn top1_error(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Input("empty confusion matrix".into()));
    }
    Ok(1.0 - cm.trace() as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn confusion_binary_examples() {
        let c = confusion_binary(&[0.9, 0.1], &[1, 0], 0.5).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fp: 0,
                tn: 1,
                fn_: 0
            }
        );
        let c = confusion_binary(&[0.0; 4], &[1, 0, 1, 0], 0.5).unwrap();
        assert_eq!((c.tp, c.fp), (0, 0));
        let c = confusion_binary(&[0.5, 0.5], &[1, 0], 0.5).unwrap();
        assert_eq!((c.fn_, c.tn), (1, 1));
        assert!(confusion_binary(&[], &[], 0.5).is_err());
    }

    #[test]
    fn f1_examples() {
        assert_eq!(
            f1(&ConfusionCounts {
                tp: 10,
                ..Default::default()
            }),
            1.0
        );
        assert_eq!(
            f1(&ConfusionCounts {
                tp: 1,
                fp: 1,
                tn: 0,
                fn_: 1
            }),
            0.5
        );
        assert_eq!(f1(&ConfusionCounts::default()), 0.0);
    }

    #[test]
    fn threshold_search_example() {
        let best = best_f1_threshold(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap();
        assert_abs_diff_eq!(best.f1, 0.8, epsilon = 1e-15);
        assert!(best.threshold > 0.1 && best.threshold <= 0.35);
    }

    #[test]
    fn threshold_search_degenerate_cases() {
        let best = best_f1_threshold(&[0.1, 0.2, 0.9, 0.95], &[0, 0, 1, 1]).unwrap();
        assert_eq!(best.f1, 1.0);
        let best = best_f1_threshold(&[0.3, 0.6, 0.2], &[0, 0, 0]).unwrap();
        assert_eq!(best.f1, 0.0);
        assert!(best.threshold > 0.6);
        assert!(best_f1_threshold(&[], &[]).is_err());
    }

    #[test]
    fn candidates_split_ties_and_adjacent_floats() {
        let c = candidate_thresholds(&[0.5, 0.5, 0.25]);
        assert_eq!(c, vec![-0.75, 0.375, 1.5]);
        let a = 0.3f64;
        let b = a.next_up();
        let c = candidate_thresholds(&[a, b]);
        assert!(c[1] >= a && c[1] < b);
    }

    #[test]
    fn binary_cost_reproduces_reported_means() {
        let cost = BinaryCostModel::new(2000.0, 100.0).unwrap();
        let c1 = real_world_cost_binary(45.4, 12.7, 15908.0, &cost).unwrap();
        assert_abs_diff_eq!(c1, 5.79, epsilon = 0.005);
        let t = real_world_cost_binary(16.1, 127.2, 15908.0, &cost).unwrap();
        assert_abs_diff_eq!(t, 2.82, epsilon = 0.005);
        assert_eq!(real_world_cost_binary(0.0, 0.0, 10.0, &cost).unwrap(), 0.0);
        assert!(real_world_cost_binary(1.0, 1.0, 0.0, &cost).is_err());
    }

    #[test]
    fn categorical_confusion() {
        let y = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        assert!(confusion_categorical(&y, &y).unwrap().is_diagonal());
        let h = Matrix::from_rows(&[[0.1, 0.7, 0.2], [0.5, 0.5, 0.0], [0.6, 0.3, 0.1]]).unwrap();
        let cm = confusion_categorical(&h, &y).unwrap();
        assert_eq!(cm.get(0, 1), 1);
        // tie between classes 0 and 1 resolves to 0
        assert_eq!(cm.get(1, 0), 1);
        assert_eq!(cm.total(), 3);
        assert_abs_diff_eq!(top1_error(&cm).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
    }

    fn table_tallies(errors: f64, special: f64) -> Matrix {
        let mut t = Matrix::zeros(10, 10);
        t[(0, 0)] = 17_500.0 - errors;
        t[(1, 2)] = special;
        t[(3, 4)] = errors - special;
        t
    }

    #[test]
    fn categorical_cost_reproduces_reported_means() {
        let costs = high_cost_pair_costs(10, 1, 2, 1.0, 19.0);
        assert_eq!(costs[(1, 2)], 20.0);
        let control = real_world_cost_categorical(&table_tallies(623.0, 6.67), &costs).unwrap();
        assert_abs_diff_eq!(control, 0.0428, epsilon = 5e-5);
        let exp = real_world_cost_categorical(&table_tallies(633.5, 2.57), &costs).unwrap();
        assert_abs_diff_eq!(exp, 0.0390, epsilon = 5e-5);
        assert_eq!(
            real_world_cost_categorical(&Matrix::identity(10), &costs).unwrap(),
            0.0
        );
        assert!(real_world_cost_categorical(&Matrix::identity(10), &Matrix::identity(10)).is_err());
    }

    #[test]
    fn top1_examples() {
        let truth: Vec<usize> = (0..100).map(|i| i % 10).collect();
        let mut pred = truth.clone();
        assert_eq!(
            top1_error(&ConfusionMatrix::from_predictions(&truth, &pred, 10).unwrap()).unwrap(),
            0.0
        );
        pred[0] = 5;
        assert_abs_diff_eq!(
            top1_error(&ConfusionMatrix::from_predictions(&truth, &pred, 10).unwrap()).unwrap(),
            0.01,
            epsilon = 1e-15
        );
        let truth: Vec<usize> = (0..17_500).map(|i| i % 10).collect();
        let pred: Vec<usize> = truth
            .iter()
            .enumerate()
            .map(|(i, &t)| if i < 623 { (t + 1) % 10 } else { t })
            .collect();
        let cm = ConfusionMatrix::from_predictions(&truth, &pred, 10).unwrap();
        assert_eq!(cm.errors(), 623);
        assert_abs_diff_eq!(top1_error(&cm).unwrap(), 0.0356, epsilon = 5e-5);
    }
}
