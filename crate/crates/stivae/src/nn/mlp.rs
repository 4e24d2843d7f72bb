//! Dense feed-forward networks.
//!
//! Weights are `out_dim x in_dim` matrices, biases `1 x out_dim` row vectors.
//! Initialization is Glorot uniform (`+-sqrt(6/(fan_in+fan_out))`) with zero
//! biases, drawn from a ChaCha12 stream so equal arguments give bit-identical
//! models.

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::nn::activation::Activation;
use crate::nn::tape::{Tape, VarId};
use crate::seed;

/// Dense matrix of 64-bit floats, row-major.
pub type Mat = Array2<f64>;

#[derive(Debug, Clone)]
pub struct DenseLayer {
    /// `out_dim x in_dim`.
    pub w: Mat,
    /// `1 x out_dim`.
    pub b: Mat,
    pub act: Activation,
}

impl DenseLayer {
    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }
}

/// A multilayer perceptron with per-layer activations.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
    pub seed: u64,
}

impl Mlp {
    /// Build a network with the given layer sizes (input first) and one
    /// activation per non-input layer.
    pub fn new(layer_sizes: &[usize], activations: &[Activation], seed_value: u64) -> Result<Mlp> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "mlp needs at least 2 layer sizes, got {}",
                layer_sizes.len()
            )));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(Error::Config(format!(
                "expected {} activations for {} layers, got {}",
                layer_sizes.len() - 1,
                layer_sizes.len(),
                activations.len()
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config("layer sizes must be positive".into()));
        }

        let mut rng = seed::rng(seed_value, "mlp-init");
        let mut layers = Vec::with_capacity(activations.len());
        for (i, &act) in activations.iter().enumerate() {
            let fan_in = layer_sizes[i];
            let fan_out = layer_sizes[i + 1];
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| dist.sample(&mut rng));
            let b = Array2::zeros((1, fan_out));
            layers.push(DenseLayer { w, b, act });
        }
        Ok(Mlp {
            layers,
            seed: seed_value,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// Forward pass over a `batch x in_dim` matrix. Pure function of
    /// `(self, input)`.
    pub fn forward(&self, input: &Mat) -> Result<Mat> {
        if input.ncols() != self.in_dim() {
            return Err(Error::Dim(format!(
                "input has {} columns, network expects {}",
                input.ncols(),
                self.in_dim()
            )));
        }
        let mut cur = input.to_owned();
        for layer in &self.layers {
            let mut z = cur.dot(&layer.w.t());
            z += &layer.b;
            z.mapv_inplace(|v| layer.act.apply(v));
            cur = z;
        }
        Ok(cur)
    }

    /// Register all parameters on a tape, returning their ids in canonical
    /// order (`w0, b0, w1, b1, ...`). Use together with [`Mlp::forward_tape`].
    pub fn register_params(&self, tape: &mut Tape) -> Vec<VarId> {
        let mut ids = Vec::with_capacity(2 * self.layers.len());
        for layer in &self.layers {
            ids.push(tape.param(layer.w.clone()));
            ids.push(tape.param(layer.b.clone()));
        }
        ids
    }

    /// Forward pass recorded on a tape. `params` must come from
    /// [`Mlp::register_params`] on the same tape.
    pub fn forward_tape(&self, tape: &mut Tape, input: VarId, params: &[VarId]) -> VarId {
        assert_eq!(params.len(), 2 * self.layers.len(), "parameter id count");
        let mut cur = input;
        for (i, layer) in self.layers.iter().enumerate() {
            let z = tape.linear(cur, params[2 * i], params[2 * i + 1]);
            cur = tape.activation(z, layer.act);
        }
        cur
    }

    /// Apply an update to every parameter in canonical order.
    pub fn visit_params_mut(&mut self, mut f: impl FnMut(&mut Mat)) {
        for layer in &mut self.layers {
            f(&mut layer.w);
            f(&mut layer.b);
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn equal_arguments_give_identical_models() {
        let sizes = [8, 128, 128, 128, 10];
        let acts = [Activation::LeakyRelu; 4];
        let a = Mlp::new(&sizes, &acts, 1).unwrap();
        let b = Mlp::new(&sizes, &acts, 1).unwrap();
        for (la, lb) in a.layers.iter().zip(&b.layers) {
            assert_eq!(la.w, lb.w);
            assert_eq!(la.b, lb.b);
        }
    }

    #[test]
    fn too_few_layers_is_a_config_error() {
        let err = Mlp::new(&[2], &[], 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn layer_shapes_follow_sizes() {
        let mlp = Mlp::new(&[3, 4, 2], &[Activation::LeakyRelu, Activation::Linear], 0).unwrap();
        assert_eq!(mlp.layers[0].w.dim(), (4, 3));
        assert_eq!(mlp.layers[1].w.dim(), (2, 4));
    }

    #[test]
    fn zero_weights_map_to_zero() {
        let mut mlp = Mlp::new(&[2, 3], &[Activation::LeakyRelu], 0).unwrap();
        mlp.layers[0].w.fill(0.0);
        let out = mlp.forward(&array![[1.0, -2.0], [0.5, 3.0]]).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut mlp = Mlp::new(&[2, 2], &[Activation::Linear], 0).unwrap();
        mlp.layers[0].w = array![[1.0, 0.0], [0.0, 1.0]];
        let x = array![[0.3, -1.2], [2.0, 0.0]];
        assert_eq!(mlp.forward(&x).unwrap(), x);
    }

    #[test]
    fn single_leaky_layer_matches_hand_evaluation() {
        let mut mlp = Mlp::new(&[2, 2], &[Activation::LeakyRelu], 0).unwrap();
        mlp.layers[0].w = array![[2.0, 0.0], [0.0, 3.0]];
        let out = mlp.forward(&array![[-1.0, 1.0]]).unwrap();
        assert_eq!(out, array![[-2.0 * 0.01, 3.0]]);
    }

    #[test]
    fn forward_is_deterministic() {
        let mlp = Mlp::new(&[4, 8, 3], &[Activation::Elu, Activation::Linear], 9).unwrap();
        let x = Mat::from_shape_fn((5, 4), |(i, j)| (i as f64) - 0.3 * (j as f64));
        assert_eq!(mlp.forward(&x).unwrap(), mlp.forward(&x).unwrap());
    }

    #[test]
    fn shape_mismatch_is_a_dim_error() {
        let mlp = Mlp::new(&[3, 2], &[Activation::Linear], 0).unwrap();
        let err = mlp.forward(&Mat::zeros((1, 4))).unwrap_err();
        assert!(matches!(err, Error::Dim(_)));
    }
}
