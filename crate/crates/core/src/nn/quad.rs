//! Quad-precision re-evaluation of a network and its loss, written out from
//! the loss formulas without sharing code with the f64 path. Central
//! differences taken here stay accurate even for gradient entries far below
//! the loss magnitude.

use f128::f128;
use num_traits::{Float, ToPrimitive};

use crate::losses::{LossSpec, PROB_EPSILON};
use crate::matrix::Matrix;
use crate::nn::{Activation, Mlp};

struct QuadLayer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f128>,
    bias: Vec<f128>,
    activation: Activation,
}

pub(super) struct QuadNet {
    layers: Vec<QuadLayer>,
}

fn q(x: f64) -> f128 {
    f128::from(x)
}

fn ln_floored(x: f128) -> f128 {
    x.max(q(PROB_EPSILON)).ln()
}

impl QuadNet {
    pub(super) fn new(mlp: &Mlp) -> QuadNet {
        let layers = mlp
            .layers()
            .iter()
            .map(|l| QuadLayer {
                inputs: l.in_dim(),
                outputs: l.out_dim(),
                weights: l.weights.as_slice().iter().map(|&w| q(w)).collect(),
                bias: l.bias.iter().map(|&b| q(b)).collect(),
                activation: l.activation,
            })
            .collect();
        QuadNet { layers }
    }

    /// Parameter in [`Mlp::parameters`] order: weights then bias of each layer.
    pub(super) fn parameter_mut(&mut self, tensor: usize, index: usize) -> &mut f128 {
        let layer = &mut self.layers[tensor / 2];
        if tensor % 2 == 0 {
            &mut layer.weights[index]
        } else {
            &mut layer.bias[index]
        }
    }

    fn forward_row(&self, x: &[f64]) -> Vec<f128> {
        let mut a: Vec<f128> = x.iter().map(|&v| q(v)).collect();
        for layer in &self.layers {
            let mut z = layer.bias.clone();
            for (i, &ai) in a.iter().enumerate().take(layer.inputs) {
                for (j, zj) in z.iter_mut().enumerate() {
                    *zj = *zj + ai * layer.weights[i * layer.outputs + j];
                }
            }
            a = match layer.activation {
                Activation::Identity => z,
                Activation::Relu => z.into_iter().map(|v| v.max(q(0.0))).collect(),
                Activation::Sigmoid => z
                    .into_iter()
                    .map(|v| q(1.0) / (q(1.0) + (-v).exp()))
                    .collect(),
                Activation::Softmax => {
                    let top = z.iter().copied().fold(z[0], |m, v| m.max(v));
                    let e: Vec<f128> = z.iter().map(|&v| (v - top).exp()).collect();
                    let total = e.iter().copied().fold(q(0.0), |s, v| s + v);
                    e.into_iter().map(|v| v / total).collect()
                }
            };
        }
        a
    }

    fn example_loss(spec: &LossSpec, p: &[f128], y: &[f64]) -> f128 {
        let y: Vec<f128> = y.iter().map(|&v| q(v)).collect();
        let one = q(1.0);
        match spec {
            LossSpec::Bce => -(y[0] * ln_floored(p[0]) + (one - y[0]) * ln_floored(one - p[0])),
            LossSpec::Wbce { weight } => {
                -(q(*weight) * y[0] * ln_floored(p[0]) + (one - y[0]) * ln_floored(one - p[0]))
            }
            LossSpec::RwwceBinary { cost } => {
                -(q(cost.w_mcfn) * y[0] * ln_floored(p[0])
                    + q(cost.w_mcfp) * (one - y[0]) * ln_floored(one - p[0]))
            }
            LossSpec::Cce => -(0..p.len()).fold(q(0.0), |s, k| s + y[k] * ln_floored(p[k])),
            LossSpec::Wcce { class_weights } => -(0..p.len()).fold(q(0.0), |s, k| {
                s + q(class_weights[k]) * y[k] * ln_floored(p[k])
            }),
            LossSpec::RwwceCategorical { cost } => {
                let mut total = q(0.0);
                for k in 0..p.len() {
                    let mut term = q(cost.w_fn()[k]) * ln_floored(p[k]);
                    for kp in (0..p.len()).filter(|&kp| kp != k) {
                        let w = cost.w_fp(k, kp).unwrap_or(0.0);
                        term = term + q(w) * ln_floored(one - p[kp]);
                    }
                    total = total + y[k] * term;
                }
                -total
            }
        }
    }

    /// Batch-mean loss.
    pub(super) fn loss(&self, spec: &LossSpec, x: &Matrix, y: &Matrix) -> f128 {
        let total = (0..x.rows()).fold(q(0.0), |s, m| {
            s + Self::example_loss(spec, &self.forward_row(x.row(m)), y.row(m))
        });
        total / q(x.rows() as f64)
    }
}

/// `(L(θ+h) - L(θ-h)) / 2h` for one parameter, with the perturbation exact in quad precision.
pub(super) fn central_difference(
    net: &mut QuadNet,
    tensor: usize,
    index: usize,
    h: f64,
    spec: &LossSpec,
    x: &Matrix,
    y: &Matrix,
) -> f64 {
    let original = *net.parameter_mut(tensor, index);
    *net.parameter_mut(tensor, index) = original + q(h);
    let plus = net.loss(spec, x, y);
    *net.parameter_mut(tensor, index) = original - q(h);
    let minus = net.loss(spec, x, y);
    *net.parameter_mut(tensor, index) = original;
    ((plus - minus) / (q(2.0) * q(h)))
        .to_f64()
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::loss_value;
    use crate::nn::{init_mlp, LayerSpec};

    #[test]
    fn agrees_with_double_precision_loss() {
        let mlp = init_mlp(
            3,
            &[
                LayerSpec::new(4, Activation::Relu),
                LayerSpec::new(3, Activation::Softmax),
            ],
            2,
        )
        .unwrap();
        let x = Matrix::from_rows(&[[0.5, -1.0, 2.0], [1.5, 0.25, -0.75]]).unwrap();
        let y = Matrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let double = loss_value(&LossSpec::Cce, &mlp.predict(&x).unwrap(), &y).unwrap();
        let quad = QuadNet::new(&mlp)
            .loss(&LossSpec::Cce, &x, &y)
            .to_f64()
            .unwrap();
        assert!((double - quad).abs() < 1e-14, "{double} vs {quad}");
    }
}
