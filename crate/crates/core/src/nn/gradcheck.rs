//! Central finite-difference check of backpropagated parameter gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::quad::{central_difference, QuadNet};
use crate::error::{Error, Result};
use crate::losses::{fused_logit_gradient, BinaryCostModel, CategoricalCostModel, LossSpec};
use crate::matrix::Matrix;
use crate::nn::{init_mlp, Activation, ForwardPass, Gradients, LayerSpec, Mlp};

/// Location of one scalar parameter: tensor index in [`Mlp::parameters`] order, then offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParamSlot {
    pub tensor: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub max_relative_error: f64,
    pub worst: Option<ParamSlot>,
    pub analytic: f64,
    pub numeric: f64,
    pub parameters_checked: usize,
    pub tolerance: f64,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error < self.tolerance
    }
}

/// Forward pass plus backpropagated gradients of `loss` on one batch.
pub fn analytic_gradients(
    mlp: &Mlp,
    x: &Matrix,
    y: &Matrix,
    loss: &LossSpec,
) -> Result<(ForwardPass, Gradients)> {
    let out = mlp.output_layer();
    loss.check_output(out.activation, out.out_dim())?;
    let pass = mlp.forward(x)?;
    let dz = fused_logit_gradient(loss, pass.final_pre_activation(), y)?;
    let grads = mlp.backward(&pass, &dz)?;
    Ok((pass, grads))
}

pub fn gradcheck(
    mlp: &Mlp,
    x: &Matrix,
    y: &Matrix,
    loss: &LossSpec,
    h: f64,
    tolerance: f64,
) -> Result<GradcheckReport> {
    let (_, grads) = analytic_gradients(mlp, x, y, loss)?;
    compare_gradients(mlp, x, y, loss, &grads, h, tolerance)
}

/// Compares the supplied gradients against central differences of the full
/// batch loss evaluated in quad precision, reporting the worst `|a-n| / max(|a|, |n|, 1e-12)`.
pub fn compare_gradients(
    mlp: &Mlp,
    x: &Matrix,
    y: &Matrix,
    loss: &LossSpec,
    analytic: &Gradients,
    h: f64,
    tolerance: f64,
) -> Result<GradcheckReport> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    let analytic = analytic.slices();
    let shapes: Vec<usize> = mlp.parameters().iter().map(|p| p.len()).collect();
    if analytic.len() != shapes.len() || analytic.iter().zip(&shapes).any(|(a, &n)| a.len() != n) {
        return Err(Error::Shape("gradients do not match the network".into()));
    }

    let mut oracle = QuadNet::new(mlp);
    let mut report = GradcheckReport {
        max_relative_error: 0.0,
        worst: None,
        analytic: 0.0,
        numeric: 0.0,
        parameters_checked: 0,
        tolerance,
    };
    for (tensor, &len) in shapes.iter().enumerate() {
        for index in 0..len {
            let numeric = central_difference(&mut oracle, tensor, index, h, loss, x, y);
            let a = analytic[tensor][index];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-12);
            report.parameters_checked += 1;
            if err > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = err;
                report.worst = Some(ParamSlot { tensor, index });
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    Ok(report)
}

/// Worst result of one loss over many random instances.
#[derive(Debug, Clone, Serialize)]
pub struct LossCheck {
    pub loss: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub worst: GradcheckReport,
}

impl LossCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub const CHECK_BATCH: usize = 8;
const CHECK_CLASSES: usize = 3;

/// One of the six losses (in declaration order) with randomly drawn weights.
pub fn random_loss(which: usize, classes: usize, rng: &mut impl Rng) -> Result<LossSpec> {
    Ok(match which {
        0 => LossSpec::Bce,
        1 => LossSpec::Wbce {
            weight: rng.gen_range(0.1..20.0),
        },
        2 => LossSpec::Cce,
        3 => LossSpec::Wcce {
            class_weights: (0..classes).map(|_| rng.gen_range(0.1..5.0)).collect(),
        },
        4 => LossSpec::RwwceBinary {
            cost: BinaryCostModel::new(rng.gen_range(0.0..2000.0), rng.gen_range(0.0..200.0))?,
        },
        5 => {
            let w_fn = (0..classes).map(|_| rng.gen_range(0.5..5.0)).collect();
            let mut w_fp = Matrix::zeros(classes, classes);
            for i in 0..classes {
                for j in (0..classes).filter(|&j| j != i) {
                    if rng.gen_bool(0.5) {
                        w_fp[(i, j)] = rng.gen_range(0.0..20.0);
                    }
                }
            }
            LossSpec::RwwceCategorical {
                cost: CategoricalCostModel::new(w_fn, w_fp)?,
            }
        }
        _ => return Err(Error::Config(format!("no loss number {which}"))),
    })
}

/// A small random network, batch and targets matching `loss`.
pub fn random_case(loss: &LossSpec, rng: &mut impl Rng) -> Result<(Mlp, Matrix, Matrix)> {
    let inputs = rng.gen_range(2..=5);
    let hidden = rng.gen_range(2..=6);
    let (out, activation) = if loss.is_binary() {
        (1, Activation::Sigmoid)
    } else {
        (CHECK_CLASSES, Activation::Softmax)
    };
    let mlp = init_mlp(
        inputs,
        &[
            LayerSpec::new(hidden, Activation::Sigmoid),
            LayerSpec::new(out, activation),
        ],
        rng.gen(),
    )?;
    let x = Matrix::from_vec(
        CHECK_BATCH,
        inputs,
        (0..CHECK_BATCH * inputs)
            .map(|_| rng.gen_range(-2.0..2.0))
            .collect(),
    )?;
    let mut y = Matrix::zeros(CHECK_BATCH, out);
    for m in 0..CHECK_BATCH {
        if out == 1 {
            y[(m, 0)] = f64::from(rng.gen_bool(0.5) as u8);
        } else {
            y[(m, rng.gen_range(0..out))] = 1.0;
        }
    }
    Ok((mlp, x, y))
}

/// Gradient checks every loss on `instances` random networks and batches each.
pub fn check_all_losses(
    seed: u64,
    instances: usize,
    h: f64,
    tolerance: f64,
) -> Result<Vec<LossCheck>> {
    if instances == 0 {
        return Err(Error::Config("need at least one instance per loss".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::with_capacity(6);
    for which in 0..6 {
        let mut worst: Option<GradcheckReport> = None;
        let mut failures = 0;
        let mut name = "";
        for _ in 0..instances {
            let loss = random_loss(which, CHECK_CLASSES, &mut rng)?;
            name = loss.name();
            let (mlp, x, y) = random_case(&loss, &mut rng)?;
            let report = gradcheck(&mlp, &x, &y, &loss, h, tolerance)?;
            failures += usize::from(!report.passed());
            if worst
                .as_ref()
                .map_or(true, |w| report.max_relative_error > w.max_relative_error)
            {
                worst = Some(report);
            }
        }
        checks.push(LossCheck {
            loss: name,
            instances,
            failures,
            worst: worst.expect("at least one instance"),
        });
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_loss_passes_on_a_few_instances() {
        for check in check_all_losses(1, 5, 1e-5, 1e-5).unwrap() {
            assert!(check.passed(), "{check:?}");
        }
    }

    #[test]
    fn corrupted_gradient_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let loss = LossSpec::Bce;
        let (mlp, x, y) = random_case(&loss, &mut rng).unwrap();
        let (_, mut grads) = analytic_gradients(&mlp, &x, &y, &loss).unwrap();
        let slot = grads.slices()[0]
            .iter()
            .position(|g| g.abs() > 1e-3)
            .expect("some weight has a visible gradient");
        grads.slices_mut()[0][slot] *= 2.0;
        let report = compare_gradients(&mlp, &x, &y, &loss, &grads, 1e-5, 1e-5).unwrap();
        assert!(!report.passed());
        assert_eq!(
            report.worst,
            Some(ParamSlot {
                tensor: 0,
                index: slot
            })
        );
    }

    #[test]
    fn mirrored_two_class_softmax_and_sigmoid() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (sig_net, x, y) = random_case(&LossSpec::Bce, &mut rng).unwrap();
        let two_class = init_mlp(
            x.cols(),
            &[
                LayerSpec::new(3, Activation::Relu),
                LayerSpec::new(2, Activation::Softmax),
            ],
            6,
        )
        .unwrap();
        let one_hot = Matrix::from_rows(
            &y.as_slice()
                .iter()
                .map(|&v| [1.0 - v, v])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(gradcheck(&sig_net, &x, &y, &LossSpec::Bce, 1e-5, 1e-5)
            .unwrap()
            .passed());
        assert!(
            gradcheck(&two_class, &x, &one_hot, &LossSpec::Cce, 1e-5, 1e-5)
                .unwrap()
                .passed()
        );
    }

    #[test]
    fn nonpositive_step_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (mlp, x, y) = random_case(&LossSpec::Bce, &mut rng).unwrap();
        assert!(gradcheck(&mlp, &x, &y, &LossSpec::Bce, 0.0, 1e-5).is_err());
    }
}
