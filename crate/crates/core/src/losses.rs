//! Cross-entropy losses with real-world cost weighting.
//!
//! Value functions take probabilities (sigmoid or softmax outputs) and return the
//! batch mean. Training never differentiates through them; it uses
//! [`fused_logit_gradient`], the gradient with respect to the final
//! pre-activation.
//!
//! Logarithm arguments are floored at [`PROB_EPSILON`], so a saturated wrong
//! prediction costs `-ln(1e-7)` instead of infinity while an exact prediction
//! still costs exactly zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::Activation;

pub const PROB_EPSILON: f64 = 1e-7;

const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[inline]
fn safe_ln(x: f64) -> f64 {
    x.max(PROB_EPSILON).ln()
}

/// Marginal real-world costs of binary errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBinaryCost")]
pub struct BinaryCostModel {
    /// Cost of a false negative over a true positive.
    pub w_mcfn: f64,
    /// Cost of a false positive over a true negative.
    pub w_mcfp: f64,
}

#[derive(Deserialize)]
struct RawBinaryCost {
    w_mcfn: f64,
    w_mcfp: f64,
}

impl TryFrom<RawBinaryCost> for BinaryCostModel {
    type Error = Error;

    fn try_from(raw: RawBinaryCost) -> Result<Self> {
        BinaryCostModel::new(raw.w_mcfn, raw.w_mcfp)
    }
}

impl BinaryCostModel {
    pub fn new(w_mcfn: f64, w_mcfp: f64) -> Result<Self> {
        for (name, w) in [("w_mcfn", w_mcfn), ("w_mcfp", w_mcfp)] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be finite and nonnegative, got {w}"
                )));
            }
        }
        if w_mcfn == 0.0 && w_mcfp == 0.0 {
            return Err(Error::Config(
                "w_mcfn and w_mcfp cannot both be zero".into(),
            ));
        }
        Ok(BinaryCostModel { w_mcfn, w_mcfp })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        BinaryCostModel::new(self.w_mcfn * factor, self.w_mcfp * factor)
    }
}

/// Per-class false-negative costs plus a false-positive cost for every
/// (true class, predicted class) pair. The diagonal of `w_fp` is never read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCategoricalCost", into = "RawCategoricalCost")]
pub struct CategoricalCostModel {
    w_fn: Vec<f64>,
    w_fp: Matrix,
}

#[derive(Serialize, Deserialize)]
struct RawCategoricalCost {
    k: usize,
    w_fn: Vec<f64>,
    w_fp: Vec<Vec<f64>>,
}

impl TryFrom<RawCategoricalCost> for CategoricalCostModel {
    type Error = Error;

    fn try_from(raw: RawCategoricalCost) -> Result<Self> {
        if raw.w_fn.len() != raw.k || raw.w_fp.len() != raw.k {
            return Err(Error::Config(format!(
                "k = {} but w_fn has {} entries and w_fp {} rows",
                raw.k,
                raw.w_fn.len(),
                raw.w_fp.len()
            )));
        }
        let w_fp = Matrix::from_rows(&raw.w_fp)?;
        CategoricalCostModel::new(raw.w_fn, w_fp)
    }
}

impl From<CategoricalCostModel> for RawCategoricalCost {
    fn from(model: CategoricalCostModel) -> Self {
        RawCategoricalCost {
            k: model.classes(),
            w_fp: model.w_fp.iter_rows().map(<[f64]>::to_vec).collect(),
            w_fn: model.w_fn,
        }
    }
}

impl CategoricalCostModel {
    pub fn new(w_fn: Vec<f64>, w_fp: Matrix) -> Result<Self> {
        let k = w_fn.len();
        if k < 2 {
            return Err(Error::Config(format!("need at least two classes, got {k}")));
        }
        if w_fp.shape() != (k, k) {
            return Err(Error::Config(format!(
                "w_fp must be {k}x{k}, got {:?}",
                w_fp.shape()
            )));
        }
        if let Some(bad) = w_fn.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Config(format!(
                "w_fn entries must be finite and nonnegative, got {bad}"
            )));
        }
        for i in 0..k {
            for j in (0..k).filter(|&j| j != i) {
                let w = w_fp[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Config(format!(
                        "w_fp[{i}][{j}] must be finite and nonnegative, got {w}"
                    )));
                }
            }
        }
        Ok(CategoricalCostModel { w_fn, w_fp })
    }

    /// Unit false-negative costs and no false-positive costs: plain categorical cross-entropy.
    pub fn uniform(k: usize) -> Result<Self> {
        CategoricalCostModel::new(vec![1.0; k], Matrix::zeros(k, k))
    }

    /// Every false negative costs `base_fn_weight`; mislabeling `true_class` as
    /// `predicted_class` additionally costs `pair_weight`.
    pub fn high_cost_pair(
        k: usize,
        true_class: usize,
        predicted_class: usize,
        pair_weight: f64,
        base_fn_weight: f64,
    ) -> Result<Self> {
        if true_class >= k || predicted_class >= k || true_class == predicted_class {
            return Err(Error::Config(format!(
                "high-cost pair ({true_class},{predicted_class}) invalid for {k} classes"
            )));
        }
        let mut w_fp = Matrix::zeros(k, k);
        w_fp[(true_class, predicted_class)] = pair_weight;
        CategoricalCostModel::new(vec![base_fn_weight; k], w_fp)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn classes(&self) -> usize {
        self.w_fn.len()
    }

    pub fn w_fn(&self) -> &[f64] {
        &self.w_fn
    }

    /// Off-diagonal false-positive cost; `None` on the diagonal.
    pub fn w_fp(&self, true_class: usize, predicted_class: usize) -> Option<f64> {
        (true_class != predicted_class).then(|| self.w_fp[(true_class, predicted_class)])
    }

    /// Overwrites a diagonal entry of `w_fp`. Has no effect on any loss.
    pub fn set_diagonal(&mut self, class: usize, value: f64) {
        self.w_fp[(class, class)] = value;
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut w_fp = self.w_fp.clone();
        w_fp.scale(factor);
        CategoricalCostModel::new(self.w_fn.iter().map(|w| w * factor).collect(), w_fp)
    }

    fn has_fp_costs(&self, true_class: usize) -> bool {
        (0..self.classes()).any(|j| j != true_class && self.w_fp[(true_class, j)] != 0.0)
    }
}

/// Which loss to train or evaluate with, together with its weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "loss", rename_all = "snake_case")]
pub enum LossSpec {
    Bce,
    Wbce { weight: f64 },
    Cce,
    Wcce { class_weights: Vec<f64> },
    RwwceBinary { cost: BinaryCostModel },
    RwwceCategorical { cost: CategoricalCostModel },
}

impl LossSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Bce => "bce",
            LossSpec::Wbce { .. } => "wbce",
            LossSpec::Cce => "cce",
            LossSpec::Wcce { .. } => "wcce",
            LossSpec::RwwceBinary { .. } => "rwwce_binary",
            LossSpec::RwwceCategorical { .. } => "rwwce_categorical",
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            LossSpec::Bce | LossSpec::Wbce { .. } | LossSpec::RwwceBinary { .. }
        )
    }

    /// Output activation the fused gradient assumes.
    pub fn output_activation(&self) -> Activation {
        if self.is_binary() {
            Activation::Sigmoid
        } else {
            Activation::Softmax
        }
    }

    /// Checks that a network with this output activation and width can be trained with the loss.
    pub fn check_output(&self, activation: Activation, width: usize) -> Result<()> {
        let expected = self.output_activation();
        let width_ok = match self {
            LossSpec::Bce | LossSpec::Wbce { .. } | LossSpec::RwwceBinary { .. } => width == 1,
            LossSpec::Cce => width >= 2,
            LossSpec::Wcce { class_weights } => width == class_weights.len(),
            LossSpec::RwwceCategorical { cost } => width == cost.classes(),
        };
        if activation != expected || !width_ok {
            return Err(Error::Incompatible {
                loss: self.name(),
                detail: format!("a {activation:?} output layer of width {width}"),
            });
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        match self {
            LossSpec::Wbce { weight } if !(weight.is_finite() && *weight > 0.0) => Err(
                Error::Config(format!("wbce weight must be positive, got {weight}")),
            ),
            LossSpec::Wcce { class_weights }
                if class_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) =>
            {
                Err(Error::Config("wcce class weights must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

fn check_binary(h: &[f64], y: &[f64]) -> Result<()> {
    if h.is_empty() {
        return Err(Error::Input("empty batch".into()));
    }
    if h.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            h.len(),
            y.len()
        )));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::Input(format!("binary label {bad} outside {{0,1}}")));
    }
    if let Some(bad) = h.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Input(format!("probability {bad} outside [0,1]")));
    }
    Ok(())
}

/// Validates a one-hot target matrix and returns the class index of every row.
pub fn one_hot_classes(y: &Matrix) -> Result<Vec<usize>> {
    y.iter_rows()
        .enumerate()
        .map(|(i, row)| {
            let mut class = None;
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0.0 => {}
                    1.0 if class.is_none() => class = Some(j),
                    _ => return Err(Error::Input(format!("row {i} is not one-hot"))),
                }
            }
            class.ok_or_else(|| Error::Input(format!("row {i} is not one-hot")))
        })
        .collect()
}

fn check_categorical(h: &Matrix, y: &Matrix) -> Result<Vec<usize>> {
    if h.rows() == 0 {
        return Err(Error::Input("empty batch".into()));
    }
    if h.shape() != y.shape() {
        return Err(Error::Shape(format!(
            "predictions {:?} vs targets {:?}",
            h.shape(),
            y.shape()
        )));
    }
    for (i, row) in h.iter_rows().enumerate() {
        if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Input(format!(
                "row {i} has a probability outside [0,1]"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::Input(format!("row {i} sums to {sum}")));
        }
    }
    one_hot_classes(y)
}

pub fn bce_loss(h: &[f64], y: &[f64]) -> Result<f64> {
    check_binary(h, y)?;
    let sum: f64 = h
        .iter()
        .zip(y)
        .map(|(&p, &t)| t * safe_ln(p) + (1.0 - t) * safe_ln(1.0 - p))
        .sum();
    Ok(-sum / h.len() as f64)
}

/// Binary cross-entropy with the positive term scaled by `weight`.
pub fn wbce_loss(h: &[f64], y: &[f64], weight: f64) -> Result<f64> {
    LossSpec::Wbce { weight }.validate()?;
    check_binary(h, y)?;
    let sum: f64 = h
        .iter()
        .zip(y)
        .map(|(&p, &t)| weight * t * safe_ln(p) + (1.0 - t) * safe_ln(1.0 - p))
        .sum();
    Ok(-sum / h.len() as f64)
}

pub fn cce_loss(h: &Matrix, y: &Matrix) -> Result<f64> {
    let classes = check_categorical(h, y)?;
    let sum: f64 = classes
        .iter()
        .enumerate()
        .map(|(m, &t)| safe_ln(h[(m, t)]))
        .sum();
    Ok(-sum / h.rows() as f64)
}

pub fn wcce_loss(h: &Matrix, y: &Matrix, class_weights: &[f64]) -> Result<f64> {
    LossSpec::Wcce {
        class_weights: class_weights.to_vec(),
    }
    .validate()?;
    let classes = check_categorical(h, y)?;
    if class_weights.len() != h.cols() {
        return Err(Error::Shape(format!(
            "{} class weights for {} classes",
            class_weights.len(),
            h.cols()
        )));
    }
    let sum: f64 = classes
        .iter()
        .enumerate()
        .map(|(m, &t)| class_weights[t] * safe_ln(h[(m, t)]))
        .sum();
    Ok(-sum / h.rows() as f64)
}

pub fn rwwce_binary_loss(h: &[f64], y: &[f64], cost: &BinaryCostModel) -> Result<f64> {
    check_binary(h, y)?;
    let sum: f64 = h
        .iter()
        .zip(y)
        .map(|(&p, &t)| cost.w_mcfn * t * safe_ln(p) + cost.w_mcfp * (1.0 - t) * safe_ln(1.0 - p))
        .sum();
    Ok(-sum / h.len() as f64)
}

pub fn rwwce_categorical_loss(h: &Matrix, y: &Matrix, cost: &CategoricalCostModel) -> Result<f64> {
    let classes = check_categorical(h, y)?;
    if cost.classes() != h.cols() {
        return Err(Error::Shape(format!(
            "cost model for {} classes, predictions have {}",
            cost.classes(),
            h.cols()
        )));
    }
    let mut sum = 0.0;
    for (m, &t) in classes.iter().enumerate() {
        let row = h.row(m);
        let mut term = cost.w_fn[t] * safe_ln(row[t]);
        for (j, &p) in row.iter().enumerate() {
            if j != t {
                let w = cost.w_fp[(t, j)];
                if w != 0.0 {
                    term += w * safe_ln(1.0 - p);
                }
            }
        }
        sum += term;
    }
    Ok(-sum / h.rows() as f64)
}

fn binary_column(h: &Matrix, what: &str) -> Result<Vec<f64>> {
    if h.cols() != 1 {
        return Err(Error::Shape(format!(
            "binary {what} must have one column, got {}",
            h.cols()
        )));
    }
    Ok(h.as_slice().to_vec())
}

/// Loss of probabilities `h` against targets `y`. Binary losses expect M×1 matrices.
pub fn loss_value(spec: &LossSpec, h: &Matrix, y: &Matrix) -> Result<f64> {
    spec.validate()?;
    match spec {
        LossSpec::Bce => bce_loss(
            &binary_column(h, "predictions")?,
            &binary_column(y, "targets")?,
        ),
        LossSpec::Wbce { weight } => wbce_loss(
            &binary_column(h, "predictions")?,
            &binary_column(y, "targets")?,
            *weight,
        ),
        LossSpec::RwwceBinary { cost } => rwwce_binary_loss(
            &binary_column(h, "predictions")?,
            &binary_column(y, "targets")?,
            cost,
        ),
        LossSpec::Cce => cce_loss(h, y),
        LossSpec::Wcce { class_weights } => wcce_loss(h, y, class_weights),
        LossSpec::RwwceCategorical { cost } => rwwce_categorical_loss(h, y, cost),
    }
}

/// Gradient of the batch loss with respect to the final pre-activations `z`
/// (sigmoid logits for binary losses, softmax logits for categorical ones).
/// Includes the `1/M` of the batch mean.
pub fn fused_logit_gradient(spec: &LossSpec, z: &Matrix, y: &Matrix) -> Result<Matrix> {
    spec.validate()?;
    if z.shape() != y.shape() {
        return Err(Error::Shape(format!(
            "logits {:?} vs targets {:?}",
            z.shape(),
            y.shape()
        )));
    }
    if z.rows() == 0 {
        return Err(Error::Input("empty batch".into()));
    }
    spec.check_output(spec.output_activation(), z.cols())?;
    let m = z.rows() as f64;

    if spec.is_binary() {
        let mut grad = Matrix::zeros(z.rows(), 1);
        for ((g, &zi), &t) in grad
            .as_mut_slice()
            .iter_mut()
            .zip(z.as_slice())
            .zip(y.as_slice())
        {
            let h = crate::nn::sigmoid(zi);
            *g = match spec {
                LossSpec::Bce => (h - t) / m,
                LossSpec::Wbce { weight } => (weight * t * (h - 1.0) + (1.0 - t) * h) / m,
                LossSpec::RwwceBinary { cost } => {
                    (cost.w_mcfn * t * (h - 1.0) + cost.w_mcfp * (1.0 - t) * h) / m
                }
                _ => unreachable!(),
            };
        }
        return Ok(grad);
    }

    let classes = one_hot_classes(y)?;
    let probs = crate::nn::softmax_rows(z);
    let k = z.cols();
    let mut grad = Matrix::zeros(z.rows(), k);
    for (i, &t) in classes.iter().enumerate() {
        let h = probs.row(i);
        let out = grad.row_mut(i);
        match spec {
            LossSpec::Cce => {
                for (l, o) in out.iter_mut().enumerate() {
                    *o = (h[l] - indicator(l == t)) / m;
                }
            }
            LossSpec::Wcce { class_weights } => {
                let a = class_weights[t];
                for (l, o) in out.iter_mut().enumerate() {
                    *o = a * (h[l] - indicator(l == t)) / m;
                }
            }
            LossSpec::RwwceCategorical { cost } => {
                let a = cost.w_fn[t];
                for (l, o) in out.iter_mut().enumerate() {
                    *o = a * (h[l] - indicator(l == t)) / m;
                }
                if cost.has_fp_costs(t) {
                    add_false_positive_gradient(out, h, t, cost, m);
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(grad)
}

#[inline]
fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Adds d/dz of `-Σ_{j≠t} w_fp[t][j]·ln(1 - h_j)` through the softmax.
///
/// For each penalized class j the contribution is `w·h_j` on logit j and
/// `-w·h_j·h_l/(1-h_j)` on every other logit l, with `1-h_j` formed as the sum
/// of the remaining probabilities so it never cancels.
fn add_false_positive_gradient(
    out: &mut [f64],
    h: &[f64],
    t: usize,
    cost: &CategoricalCostModel,
    m: f64,
) {
    for j in (0..h.len()).filter(|&j| j != t) {
        let w = cost.w_fp[(t, j)];
        if w == 0.0 {
            continue;
        }
        let rest: f64 = h
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &p)| p)
            .sum();
        for (l, o) in out.iter_mut().enumerate() {
            if l == j {
                *o += w * h[j] / m;
            } else if rest > 0.0 {
                *o -= w * h[j] * (h[l] / rest) / m;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rows(r: &[&[f64]]) -> Matrix {
        Matrix::from_rows(r).unwrap()
    }

    #[test]
    fn bce_examples() {
        assert_abs_diff_eq!(
            bce_loss(&[0.6], &[1.0]).unwrap(),
            -(0.6f64.ln()),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(bce_loss(&[0.6], &[1.0]).unwrap(), 0.5108, epsilon = 1e-4);
        assert_eq!(bce_loss(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            bce_loss(&[0.5, 0.5], &[0.0, 1.0]).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn bce_errors() {
        assert!(bce_loss(&[], &[]).is_err());
        assert!(bce_loss(&[0.5], &[2.0]).is_err());
        assert!(bce_loss(&[1.5], &[1.0]).is_err());
        assert!(bce_loss(&[0.5, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn saturated_predictions_stay_finite() {
        let v = bce_loss(&[0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(v, -(PROB_EPSILON.ln()), epsilon = 1e-12);
    }

    #[test]
    fn wbce_examples() {
        let h = [0.3, 0.6, 0.9];
        let y = [1.0, 0.0, 1.0];
        assert_eq!(wbce_loss(&h, &y, 1.0).unwrap(), bce_loss(&h, &y).unwrap());
        assert_abs_diff_eq!(
            wbce_loss(&[0.6], &[1.0], 2.0).unwrap(),
            1.0217,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            wbce_loss(&[0.6], &[0.0], 2.0).unwrap(),
            -(0.4f64.ln()),
            epsilon = 1e-15
        );
        assert!(wbce_loss(&h, &y, 0.0).is_err());
    }

    #[test]
    fn cce_ignores_spread_of_wrong_mass() {
        let y = rows(&[&[1.0, 0.0, 0.0]]);
        let a = cce_loss(&rows(&[&[0.6, 0.3, 0.1]]), &y).unwrap();
        let b = cce_loss(&rows(&[&[0.6, 0.2, 0.2]]), &y).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a, 0.5108, epsilon = 1e-4);
    }

    #[test]
    fn cce_examples() {
        let y = rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(cce_loss(&y, &y).unwrap(), 0.0);
        let mut uniform = Matrix::zeros(1, 10);
        uniform.as_mut_slice().fill(0.1);
        let mut target = Matrix::zeros(1, 10);
        target[(0, 3)] = 1.0;
        assert_abs_diff_eq!(
            cce_loss(&uniform, &target).unwrap(),
            10f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn cce_errors() {
        let h = rows(&[&[0.5, 0.5]]);
        assert!(cce_loss(&h, &rows(&[&[1.0, 1.0]])).is_err());
        assert!(cce_loss(&h, &rows(&[&[0.0, 0.0]])).is_err());
        assert!(cce_loss(&rows(&[&[0.5, 0.6]]), &rows(&[&[1.0, 0.0]])).is_err());
    }

    #[test]
    fn wcce_examples() {
        let h = rows(&[&[0.5, 0.25, 0.25]]);
        let y = rows(&[&[1.0, 0.0, 0.0]]);
        assert_eq!(
            wcce_loss(&h, &y, &[1.0; 3]).unwrap(),
            cce_loss(&h, &y).unwrap()
        );
        assert_abs_diff_eq!(
            wcce_loss(&h, &y, &[2.0, 1.0, 1.0]).unwrap(),
            1.3863,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            wcce_loss(&h, &y, &[1.0, 3.0, 1.0]).unwrap(),
            -(0.5f64.ln()),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rwwce_binary_examples() {
        let h = [0.2, 0.7, 0.55];
        let y = [0.0, 1.0, 1.0];
        let unit = BinaryCostModel::new(1.0, 1.0).unwrap();
        assert_eq!(
            rwwce_binary_loss(&h, &y, &unit).unwrap(),
            bce_loss(&h, &y).unwrap()
        );
        let paper = BinaryCostModel::new(2000.0, 100.0).unwrap();
        assert_abs_diff_eq!(
            rwwce_binary_loss(&[0.5], &[1.0], &paper).unwrap(),
            2000.0 * std::f64::consts::LN_2,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            rwwce_binary_loss(&[0.5], &[1.0], &paper).unwrap(),
            1386.29,
            epsilon = 0.01
        );
    }

    #[test]
    fn rwwce_binary_minimum_for_coin_game() {
        // one head and one tail, both predicted with the same p
        let cost = BinaryCostModel::new(9.0, 1.0).unwrap();
        let loss = |p: f64| rwwce_binary_loss(&[p, p], &[1.0, 0.0], &cost).unwrap();
        let best = (1..1000)
            .map(|i| i as f64 / 1000.0)
            .min_by(|a, b| loss(*a).total_cmp(&loss(*b)))
            .unwrap();
        assert_abs_diff_eq!(best, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn rwwce_categorical_examples() {
        let h = rows(&[&[0.6, 0.3, 0.1]]);
        let y = rows(&[&[1.0, 0.0, 0.0]]);
        let cost = CategoricalCostModel::high_cost_pair(3, 0, 1, 19.0, 1.0).unwrap();
        let expected = -(0.6f64.ln() + 19.0 * 0.7f64.ln());
        assert_abs_diff_eq!(
            rwwce_categorical_loss(&h, &y, &cost).unwrap(),
            expected,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(expected, 7.288, epsilon = 1e-3);

        let uniform = CategoricalCostModel::uniform(3).unwrap();
        assert_eq!(
            rwwce_categorical_loss(&h, &y, &uniform).unwrap(),
            cce_loss(&h, &y).unwrap()
        );
        assert_eq!(rwwce_categorical_loss(&y, &y, &cost).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_is_never_read() {
        let h = rows(&[&[0.2, 0.5, 0.3], &[0.1, 0.1, 0.8]]);
        let y = rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let cost = CategoricalCostModel::high_cost_pair(3, 1, 2, 4.0, 1.0).unwrap();
        let mut poked = cost.clone();
        poked.set_diagonal(0, 123.0);
        poked.set_diagonal(1, 7.0);
        assert_eq!(
            rwwce_categorical_loss(&h, &y, &cost).unwrap(),
            rwwce_categorical_loss(&h, &y, &poked).unwrap()
        );
    }

    #[test]
    fn cost_model_validation() {
        assert!(BinaryCostModel::new(0.0, 0.0).is_err());
        assert!(BinaryCostModel::new(-1.0, 1.0).is_err());
        assert!(BinaryCostModel::new(f64::NAN, 1.0).is_err());
        assert!(CategoricalCostModel::high_cost_pair(10, 3, 3, 19.0, 1.0).is_err());
        assert!(CategoricalCostModel::new(vec![1.0, -1.0], Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn cost_models_from_json() {
        let b = BinaryCostModel::from_json(r#"{"w_mcfn": 2000, "w_mcfp": 100}"#).unwrap();
        assert_eq!(b, BinaryCostModel::new(2000.0, 100.0).unwrap());
        assert!(BinaryCostModel::from_json(r#"{"w_mcfn": 0, "w_mcfp": 0}"#).is_err());

        let c = CategoricalCostModel::from_json(
            r#"{"k": 2, "w_fn": [1, 2], "w_fp": [[0, 5], [0.5, 0]]}"#,
        )
        .unwrap();
        assert_eq!(c.w_fn(), &[1.0, 2.0]);
        assert_eq!(c.w_fp(0, 1), Some(5.0));
        assert_eq!(c.w_fp(1, 1), None);
        let back: CategoricalCostModel =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(CategoricalCostModel::from_json(
            r#"{"k": 3, "w_fn": [1, 2], "w_fp": [[0, 5], [0.5, 0]]}"#
        )
        .is_err());
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let h = Matrix::column(&[0.1, 0.8, 0.4]);
        let y = Matrix::column(&[0.0, 1.0, 1.0]);
        let unit = BinaryCostModel::new(1.0, 1.0).unwrap();
        let bce = loss_value(&LossSpec::Bce, &h, &y).unwrap();
        assert_eq!(bce, bce_loss(h.as_slice(), y.as_slice()).unwrap());
        assert_eq!(
            loss_value(&LossSpec::RwwceBinary { cost: unit }, &h, &y).unwrap(),
            bce
        );

        let hc = rows(&[&[0.1, 0.7, 0.2], &[0.3, 0.3, 0.4]]);
        let yc = rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]);
        let cost = CategoricalCostModel::uniform(3).unwrap();
        assert_eq!(
            loss_value(&LossSpec::RwwceCategorical { cost }, &hc, &yc).unwrap(),
            loss_value(&LossSpec::Cce, &hc, &yc).unwrap()
        );
        assert!(loss_value(&LossSpec::Bce, &hc, &yc).is_err());
    }

    #[test]
    fn bce_gradient_example() {
        // sigmoid(z) = 0.6
        let z = Matrix::column(&[(0.6f64 / 0.4).ln()]);
        let g = fused_logit_gradient(&LossSpec::Bce, &z, &Matrix::column(&[1.0])).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], -0.4, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_gradients_are_bitwise_equal() {
        let z = Matrix::column(&[-2.0, 0.3, 4.0, 0.0]);
        let y = Matrix::column(&[0.0, 1.0, 1.0, 0.0]);
        let unit = BinaryCostModel::new(1.0, 1.0).unwrap();
        assert_eq!(
            fused_logit_gradient(&LossSpec::Bce, &z, &y).unwrap(),
            fused_logit_gradient(&LossSpec::RwwceBinary { cost: unit }, &z, &y).unwrap()
        );
        let zc = rows(&[&[0.1, -1.0, 2.0], &[3.0, 0.0, 0.5]]);
        let yc = rows(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let cost = CategoricalCostModel::uniform(3).unwrap();
        assert_eq!(
            fused_logit_gradient(&LossSpec::Cce, &zc, &yc).unwrap(),
            fused_logit_gradient(&LossSpec::RwwceCategorical { cost }, &zc, &yc).unwrap()
        );
    }

    #[test]
    fn gradient_rejects_mismatches() {
        let z = rows(&[&[0.1, 0.2]]);
        assert!(fused_logit_gradient(&LossSpec::Bce, &z, &rows(&[&[1.0, 0.0]])).is_err());
        assert!(fused_logit_gradient(&LossSpec::Cce, &z, &rows(&[&[1.0, 0.0, 0.0]])).is_err());
        let cost = CategoricalCostModel::uniform(3).unwrap();
        assert!(fused_logit_gradient(
            &LossSpec::RwwceCategorical { cost },
            &z,
            &rows(&[&[1.0, 0.0]])
        )
        .is_err());
    }
}
