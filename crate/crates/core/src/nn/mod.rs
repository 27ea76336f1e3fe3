//! Dense feed-forward networks: layers, forward and backward passes.

mod adam;
mod gradcheck;
mod quad;
mod train;

pub use adam::{adam_step, AdamState};
pub use gradcheck::{
    analytic_gradients, check_all_losses, compare_gradients, gradcheck, random_case, random_loss,
    GradcheckReport, LossCheck, ParamSlot, CHECK_BATCH,
};
pub use train::{train, TrainConfig, TrainOutcome};

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Softmax,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax with per-row max subtraction.
pub fn softmax_rows(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

impl Activation {
    pub fn apply(self, z: &Matrix) -> Matrix {
        match self {
            Activation::Identity => z.clone(),
            Activation::Relu => z.map(|v| v.max(0.0)),
            Activation::Sigmoid => z.map(sigmoid),
            Activation::Softmax => softmax_rows(z),
        }
    }

    /// Elementwise derivative at pre-activation `z`. Softmax has no elementwise
    /// derivative and is only allowed on the output layer.
    fn derivative(self, z: &Matrix) -> Matrix {
        match self {
            Activation::Identity => z.map(|_| 1.0),
            Activation::Relu => z.map(|v| if v > 0.0 { 1.0 } else { 0.0 }),
            Activation::Sigmoid => z.map(|v| {
                let s = sigmoid(v);
                s * (1.0 - s)
            }),
            Activation::Softmax => unreachable!("softmax is only valid on the output layer"),
        }
    }
}

/// Width and activation of one layer; the input width comes from the previous layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub units: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(units: usize, activation: Activation) -> Self {
        LayerSpec { units, activation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// in_dim × out_dim
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }

    fn pre_activation(&self, x: &Matrix) -> Result<Matrix> {
        let mut z = x.matmul(&self.weights)?;
        z.add_row_vector(&self.bias)?;
        Ok(z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Input fed to each layer.
    pub inputs: Vec<Matrix>,
    /// Pre-activation of each layer.
    pub pre_activations: Vec<Matrix>,
    /// Activated output of the last layer.
    pub output: Matrix,
}

impl ForwardPass {
    pub fn final_pre_activation(&self) -> &Matrix {
        self.pre_activations
            .last()
            .expect("an Mlp has at least one layer")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    /// Weight and bias slices in the same order as [`Mlp::parameters_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|&v| v == 0.0))
    }
}

/// Builds a network with Glorot-uniform weights and zero biases.
pub fn init_mlp(input_dim: usize, topology: &[LayerSpec], seed: u64) -> Result<Mlp> {
    Mlp::init(input_dim, topology, seed)
}

impl Mlp {
    pub fn init(input_dim: usize, topology: &[LayerSpec], seed: u64) -> Result<Mlp> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut in_dim = input_dim;
        let mut layers = Vec::with_capacity(topology.len());
        for spec in topology {
            if in_dim == 0 || spec.units == 0 {
                return Err(Error::Topology(format!(
                    "layer {} has a zero dimension",
                    layers.len()
                )));
            }
            let limit = (6.0 / (in_dim + spec.units) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let data = (0..in_dim * spec.units)
                .map(|_| dist.sample(&mut rng))
                .collect();
            layers.push(DenseLayer {
                weights: Matrix::from_vec(in_dim, spec.units, data)?,
                bias: vec![0.0; spec.units],
                activation: spec.activation,
            });
            in_dim = spec.units;
        }
        Mlp::from_layers(layers)
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Mlp> {
        if layers.is_empty() {
            return Err(Error::Topology("a network needs at least one layer".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim() == 0 || layer.out_dim() == 0 {
                return Err(Error::Topology(format!("layer {i} has a zero dimension")));
            }
            if layer.bias.len() != layer.out_dim() {
                return Err(Error::Topology(format!(
                    "layer {i} has {} biases for {} outputs",
                    layer.bias.len(),
                    layer.out_dim()
                )));
            }
            if layer.activation == Activation::Softmax && i + 1 != layers.len() {
                return Err(Error::Topology(format!(
                    "softmax on hidden layer {i}; it is only allowed on the output layer"
                )));
            }
            if i > 0 && layers[i - 1].out_dim() != layer.in_dim() {
                return Err(Error::Topology(format!(
                    "layer {} outputs {} values but layer {i} expects {}",
                    i - 1,
                    layers[i - 1].out_dim(),
                    layer.in_dim()
                )));
            }
        }
        Ok(Mlp { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.output_layer().out_dim()
    }

    pub fn output_layer(&self) -> &DenseLayer {
        self.layers.last().expect("an Mlp has at least one layer")
    }

    /// (weight count, bias count)
    pub fn parameter_count(&self) -> (usize, usize) {
        self.layers.iter().fold((0, 0), |(w, b), l| {
            (w + l.in_dim() * l.out_dim(), b + l.bias.len())
        })
    }

    pub fn parameters(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} columns, network expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Output probabilities only, without retaining intermediates.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers {
            a = layer.activation.apply(&layer.pre_activation(&a)?);
        }
        Ok(a)
    }

    pub fn forward(&self, x: &Matrix) -> Result<ForwardPass> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut a = x.clone();
        for layer in &self.layers {
            let z = layer.pre_activation(&a)?;
            let next = layer.activation.apply(&z);
            inputs.push(a);
            pre_activations.push(z);
            a = next;
        }
        Ok(ForwardPass {
            inputs,
            pre_activations,
            output: a,
        })
    }

    /// Backpropagates `dz_final`, the loss gradient with respect to the final
    /// pre-activation. Batch averaging is whatever `dz_final` already carries.
    pub fn backward(&self, pass: &ForwardPass, dz_final: &Matrix) -> Result<Gradients> {
        if pass.pre_activations.len() != self.layers.len() {
            return Err(Error::Shape(
                "forward pass belongs to a different network".into(),
            ));
        }
        if dz_final.shape() != pass.final_pre_activation().shape() {
            return Err(Error::Shape(format!(
                "upstream gradient {:?} vs final pre-activation {:?}",
                dz_final.shape(),
                pass.final_pre_activation().shape()
            )));
        }
        let mut grads: Vec<LayerGradient> = Vec::with_capacity(self.layers.len());
        let mut dz = dz_final.clone();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            grads.push(LayerGradient {
                weights: pass.inputs[l].t_matmul(&dz)?,
                bias: dz.column_sums(),
            });
            if l > 0 {
                let mut da = dz.matmul_t(&layer.weights)?;
                let below = &self.layers[l - 1];
                da.hadamard_assign(&below.activation.derivative(&pass.pre_activations[l - 1]))?;
                dz = da;
            }
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn binary_topology() -> Vec<LayerSpec> {
        vec![
            LayerSpec::new(10, Activation::Relu),
            LayerSpec::new(1, Activation::Sigmoid),
        ]
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_mlp(784, &binary_topology(), 7).unwrap();
        let b = init_mlp(784, &binary_topology(), 7).unwrap();
        assert_eq!(a, b);
        let c = init_mlp(784, &binary_topology(), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_respects_glorot_range() {
        let mlp = init_mlp(784, &binary_topology(), 1).unwrap();
        let limit = (6.0f64 / 794.0).sqrt();
        let w = mlp.layers()[0].weights.as_slice();
        assert!(w.iter().all(|v| v.abs() <= limit));
        assert!(w.iter().any(|v| v.abs() > 0.9 * limit));
        assert!(mlp
            .layers()
            .iter()
            .all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn categorical_parameter_count() {
        let mlp = init_mlp(
            784,
            &[
                LayerSpec::new(50, Activation::Relu),
                LayerSpec::new(20, Activation::Relu),
                LayerSpec::new(10, Activation::Softmax),
            ],
            3,
        )
        .unwrap();
        assert_eq!(mlp.layers().len(), 3);
        assert_eq!(mlp.parameter_count(), (784 * 50 + 50 * 20 + 20 * 10, 80));
    }

    #[test]
    fn softmax_only_on_output() {
        let err = init_mlp(
            4,
            &[
                LayerSpec::new(3, Activation::Softmax),
                LayerSpec::new(1, Activation::Sigmoid),
            ],
            0,
        );
        assert!(matches!(err, Err(Error::Topology(_))));
        assert!(init_mlp(4, &[LayerSpec::new(0, Activation::Relu)], 0).is_err());
        assert!(init_mlp(4, &[], 0).is_err());
    }

    #[test]
    fn mismatched_layers_rejected() {
        let a = DenseLayer {
            weights: Matrix::zeros(3, 4),
            bias: vec![0.0; 4],
            activation: Activation::Relu,
        };
        let b = DenseLayer {
            weights: Matrix::zeros(5, 1),
            bias: vec![0.0],
            activation: Activation::Sigmoid,
        };
        assert!(Mlp::from_layers(vec![a, b]).is_err());
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mlp = Mlp::from_layers(vec![DenseLayer {
            weights: Matrix::identity(3),
            bias: vec![0.0; 3],
            activation: Activation::Identity,
        }])
        .unwrap();
        let x = Matrix::from_rows(&[[1.0, -2.0, 3.5], [0.0, 0.25, -1.0]]).unwrap();
        assert_eq!(mlp.forward(&x).unwrap().output, x);
        assert!(mlp.forward(&Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn softmax_symmetry_and_stability() {
        let out = softmax_rows(&Matrix::zeros(1, 10));
        for &v in out.as_slice() {
            assert_abs_diff_eq!(v, 0.1, epsilon = 1e-15);
        }
        let out = softmax_rows(&Matrix::from_rows(&[[1000.0, 0.0]]).unwrap());
        assert!(out.is_finite());
        assert_abs_diff_eq!(out[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
        assert_abs_diff_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let mlp = init_mlp(5, &binary_topology(), 2).unwrap();
        let x = Matrix::from_vec(3, 5, (0..15).map(|i| i as f64 / 10.0).collect()).unwrap();
        let pass = mlp.forward(&x).unwrap();
        let grads = mlp.backward(&pass, &Matrix::zeros(3, 1)).unwrap();
        assert!(grads.is_zero());
        assert!(mlp.backward(&pass, &Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn single_linear_layer_weight_gradient() {
        // dJ/dW = Xᵀ·dJ/dZ with the 1/M already inside dJ/dZ
        let mlp = Mlp::from_layers(vec![DenseLayer {
            weights: Matrix::from_rows(&[[0.5, -1.0], [2.0, 0.25]]).unwrap(),
            bias: vec![0.1, -0.2],
            activation: Activation::Identity,
        }])
        .unwrap();
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, -1.0]]).unwrap();
        let dz = Matrix::from_rows(&[[0.4, -0.2], [0.1, 0.3]]).unwrap();
        let pass = mlp.forward(&x).unwrap();
        let g = mlp.backward(&pass, &dz).unwrap();
        // by hand: [[1*0.4+3*0.1, 1*-0.2+3*0.3], [2*0.4-1*0.1, 2*-0.2-1*0.3]]
        let expect = [0.7, 0.7, 0.7, -0.7];
        for (a, e) in g.layers[0].weights.as_slice().iter().zip(expect) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(g.layers[0].bias[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.layers[0].bias[1], 0.1, epsilon = 1e-15);
    }
}
