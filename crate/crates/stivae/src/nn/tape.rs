//! Minimal reverse-mode gradient engine.
//!
//! A [`Tape`] records a feed-forward computation over dense matrices as a
//! flat list of nodes. Calling [`Tape::backward`] on a scalar node fills the
//! gradients of every parameter node by a single reverse sweep. The op set is
//! deliberately small: exactly what dense networks and the Gaussian ELBO
//! need. Shape mismatches between operands are programmer errors and panic.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::nn::activation::Activation;
use crate::nn::mlp::Mat;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(usize);

enum Op {
    /// Constant input; no gradient tracked.
    Leaf,
    /// Trainable parameter; gradient accumulated in backward.
    Param,
    /// `x . w^T + b` with `w: out x in`, `b: 1 x out` broadcast over rows.
    Linear { x: VarId, w: VarId, b: VarId },
    Act { x: VarId, f: Activation },
    Add { a: VarId, b: VarId },
    Sub { a: VarId, b: VarId },
    Mul { a: VarId, b: VarId },
    Exp { x: VarId },
    Scale { x: VarId, c: f64 },
    AddConst { x: VarId },
    Clamp { x: VarId, lo: f64, hi: f64 },
    /// Column slice `x[:, start..start+len]`.
    Cols { x: VarId, start: usize, len: usize },
    /// Scalar `mean over rows of (sum over columns)`, a `1 x 1` node.
    MeanRowSum { x: VarId },
}

struct Node {
    value: Mat,
    grad: Option<Mat>,
    op: Op,
    needs_grad: bool,
}

/// Recorded computation. Create with [`Tape::new`], push leaves/params, build
/// the graph with the op methods, then call [`Tape::backward`] once.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    ran_backward: bool,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    fn push(&mut self, value: Mat, op: Op, needs_grad: bool) -> VarId {
        self.nodes.push(Node {
            value,
            grad: None,
            op,
            needs_grad,
        });
        VarId(self.nodes.len() - 1)
    }

    fn needs(&self, id: VarId) -> bool {
        self.nodes[id.0].needs_grad
    }

    pub fn value(&self, id: VarId) -> &Mat {
        &self.nodes[id.0].value
    }

    /// Scalar value of a `1 x 1` node.
    pub fn scalar(&self, id: VarId) -> f64 {
        let v = &self.nodes[id.0].value;
        assert_eq!(v.dim(), (1, 1), "scalar() on a non-scalar node");
        v[(0, 0)]
    }

    /// Constant input node.
    pub fn leaf(&mut self, value: Mat) -> VarId {
        self.push(value, Op::Leaf, false)
    }

    /// Trainable parameter node; its gradient is available after backward.
    pub fn param(&mut self, value: Mat) -> VarId {
        self.push(value, Op::Param, true)
    }

    pub fn linear(&mut self, x: VarId, w: VarId, b: VarId) -> VarId {
        let mut z = self.nodes[x.0].value.dot(&self.nodes[w.0].value.t());
        z += &self.nodes[b.0].value;
        let ng = self.needs(x) || self.needs(w) || self.needs(b);
        self.push(z, Op::Linear { x, w, b }, ng)
    }

    pub fn activation(&mut self, x: VarId, f: Activation) -> VarId {
        let v = self.nodes[x.0].value.mapv(|t| f.apply(t));
        let ng = self.needs(x);
        self.push(v, Op::Act { x, f }, ng)
    }

    pub fn add(&mut self, a: VarId, b: VarId) -> VarId {
        let v = &self.nodes[a.0].value + &self.nodes[b.0].value;
        let ng = self.needs(a) || self.needs(b);
        self.push(v, Op::Add { a, b }, ng)
    }

    pub fn sub(&mut self, a: VarId, b: VarId) -> VarId {
        let v = &self.nodes[a.0].value - &self.nodes[b.0].value;
        let ng = self.needs(a) || self.needs(b);
        self.push(v, Op::Sub { a, b }, ng)
    }

    pub fn mul(&mut self, a: VarId, b: VarId) -> VarId {
        let v = &self.nodes[a.0].value * &self.nodes[b.0].value;
        let ng = self.needs(a) || self.needs(b);
        self.push(v, Op::Mul { a, b }, ng)
    }

    pub fn exp(&mut self, x: VarId) -> VarId {
        let v = self.nodes[x.0].value.mapv(f64::exp);
        let ng = self.needs(x);
        self.push(v, Op::Exp { x }, ng)
    }

    pub fn scale(&mut self, x: VarId, c: f64) -> VarId {
        let v = self.nodes[x.0].value.mapv(|t| c * t);
        let ng = self.needs(x);
        self.push(v, Op::Scale { x, c }, ng)
    }

    pub fn add_const(&mut self, x: VarId, c: f64) -> VarId {
        let v = self.nodes[x.0].value.mapv(|t| t + c);
        let ng = self.needs(x);
        self.push(v, Op::AddConst { x }, ng)
    }

    pub fn clamp(&mut self, x: VarId, lo: f64, hi: f64) -> VarId {
        let v = self.nodes[x.0].value.mapv(|t| t.clamp(lo, hi));
        let ng = self.needs(x);
        self.push(v, Op::Clamp { x, lo, hi }, ng)
    }

    pub fn cols(&mut self, x: VarId, start: usize, len: usize) -> VarId {
        let v = self.nodes[x.0]
            .value
            .slice(s![.., start..start + len])
            .to_owned();
        let ng = self.needs(x);
        self.push(v, Op::Cols { x, start, len }, ng)
    }

    pub fn mean_row_sum(&mut self, x: VarId) -> VarId {
        let src = &self.nodes[x.0].value;
        let v = Array2::from_elem((1, 1), src.sum() / src.nrows() as f64);
        let ng = self.needs(x);
        self.push(v, Op::MeanRowSum { x }, ng)
    }

    fn add_grad(&mut self, id: VarId, g: &Mat) {
        if !self.nodes[id.0].needs_grad {
            return;
        }
        let node = &mut self.nodes[id.0];
        match node.grad {
            Some(ref mut acc) => *acc += g,
            None => node.grad = Some(g.clone()),
        }
    }

    /// Reverse sweep seeding `d loss/d loss = 1`. `loss` must be a `1 x 1`
    /// node; call once per tape.
    pub fn backward(&mut self, loss: VarId) -> Result<()> {
        if self.ran_backward {
            return Err(Error::State("backward already ran on this tape".into()));
        }
        if self.nodes[loss.0].value.dim() != (1, 1) {
            return Err(Error::State("backward target must be a 1x1 scalar node".into()));
        }
        self.ran_backward = true;
        self.nodes[loss.0].grad = Some(Array2::from_elem((1, 1), 1.0));

        for i in (0..self.nodes.len()).rev() {
            if !self.nodes[i].needs_grad {
                continue;
            }
            let Some(g) = self.nodes[i].grad.take() else {
                continue;
            };
            // Dispatch on a copy of the op metadata to appease the borrow checker.
            match self.nodes[i].op {
                Op::Leaf | Op::Param => {
                    self.nodes[i].grad = Some(g);
                    continue;
                }
                Op::Linear { x, w, b } => {
                    if self.needs(x) {
                        let gx = g.dot(&self.nodes[w.0].value);
                        self.add_grad(x, &gx);
                    }
                    if self.needs(w) {
                        let gw = g.t().dot(&self.nodes[x.0].value);
                        self.add_grad(w, &gw);
                    }
                    if self.needs(b) {
                        let gb = g.sum_axis(ndarray::Axis(0)).insert_axis(ndarray::Axis(0));
                        self.add_grad(b, &gb);
                    }
                }
                Op::Act { x, f } => {
                    let gx = {
                        let xv = &self.nodes[x.0].value;
                        let mut out = g.clone();
                        out.zip_mut_with(xv, |gv, &xv| *gv *= f.grad(xv));
                        out
                    };
                    self.add_grad(x, &gx);
                }
                Op::Add { a, b } => {
                    self.add_grad(a, &g);
                    self.add_grad(b, &g);
                }
                Op::Sub { a, b } => {
                    self.add_grad(a, &g);
                    let neg = g.mapv(|t| -t);
                    self.add_grad(b, &neg);
                }
                Op::Mul { a, b } => {
                    if self.needs(a) {
                        let ga = &g * &self.nodes[b.0].value;
                        self.add_grad(a, &ga);
                    }
                    if self.needs(b) {
                        let gb = &g * &self.nodes[a.0].value;
                        self.add_grad(b, &gb);
                    }
                }
                Op::Exp { x } => {
                    let gx = &g * &self.nodes[i].value;
                    self.add_grad(x, &gx);
                }
                Op::Scale { x, c } => {
                    let gx = g.mapv(|t| c * t);
                    self.add_grad(x, &gx);
                }
                Op::AddConst { x } => {
                    self.add_grad(x, &g);
                }
                Op::Clamp { x, lo, hi } => {
                    let gx = {
                        let xv = &self.nodes[x.0].value;
                        let mut out = g.clone();
                        out.zip_mut_with(xv, |gv, &xv| {
                            if xv < lo || xv > hi {
                                *gv = 0.0;
                            }
                        });
                        out
                    };
                    self.add_grad(x, &gx);
                }
                Op::Cols { x, start, len } => {
                    if self.needs(x) {
                        let dim = self.nodes[x.0].value.raw_dim();
                        let mut gx = Array2::zeros(dim);
                        gx.slice_mut(s![.., start..start + len]).assign(&g);
                        self.add_grad(x, &gx);
                    }
                }
                Op::MeanRowSum { x } => {
                    let src_dim = self.nodes[x.0].value.raw_dim();
                    let gx = Array2::from_elem(src_dim, g[(0, 0)] / src_dim[0] as f64);
                    self.add_grad(x, &gx);
                }
            }
        }
        Ok(())
    }

    /// Gradient of a parameter node; zero matrix if the loss did not depend
    /// on it. Errors if backward has not run.
    pub fn grad(&self, id: VarId) -> Result<Mat> {
        if !self.ran_backward {
            return Err(Error::State(
                "gradients requested before backward ran on this tape".into(),
            ));
        }
        Ok(match &self.nodes[id.0].grad {
            Some(g) => g.clone(),
            None => Array2::zeros(self.nodes[id.0].value.raw_dim()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::Mlp;
    use ndarray::array;

    #[test]
    fn grad_before_backward_is_a_state_error() {
        let mut tape = Tape::new();
        let p = tape.param(array![[1.0]]);
        assert!(matches!(tape.grad(p), Err(Error::State(_))));
    }

    #[test]
    fn bias_gradient_of_summed_linear_layer_is_all_ones() {
        // loss = sum of outputs of a linear layer over one row.
        let mut tape = Tape::new();
        let x = tape.leaf(array![[0.5, -1.0, 2.0]]);
        let w = tape.param(Mat::zeros((2, 3)));
        let b = tape.param(Mat::zeros((1, 2)));
        let out = tape.linear(x, w, b);
        let loss = tape.mean_row_sum(out);
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad(b).unwrap(), array![[1.0, 1.0]]);
    }

    #[test]
    fn half_squared_norm_gradient_matches_analytic_form() {
        // loss = 0.5 * ||W x||^2 for a 2x2 W; d loss / d W = (W x) x^T.
        let wv = array![[1.0, 2.0], [-0.5, 0.3]];
        let xv = array![[0.7, -1.1]]; // row vector; W x computed as x W^T
        let mut tape = Tape::new();
        let x = tape.leaf(xv.clone());
        let w = tape.param(wv.clone());
        let b = tape.param(Mat::zeros((1, 2)));
        let out = tape.linear(x, w, b);
        let sq = tape.mul(out, out);
        let s = tape.mean_row_sum(sq);
        let loss = tape.scale(s, 0.5);
        tape.backward(loss).unwrap();

        let wx = wv.dot(&xv.t()); // 2x1
        let expected = wx.dot(&xv); // 2x2 = (W x) x^T
        let got = tape.grad(w).unwrap();
        for (a, b) in expected.iter().zip(got.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    /// Central-difference oracle for the gradient check invariant.
    fn finite_diff_check(sizes: &[usize], acts: &[Activation], batch: usize, seed: u64) {
        let mlp = Mlp::new(sizes, acts, seed).unwrap();
        let x = Mat::from_shape_fn((batch, sizes[0]), |(i, j)| {
            ((i * 7 + j * 3 + seed as usize) % 11) as f64 / 5.0 - 1.0
        });

        // Loss = mean over rows of sum of squared outputs.
        let loss_of = |m: &Mlp| -> f64 {
            let out = m.forward(&x).unwrap();
            out.mapv(|v| v * v).sum() / out.nrows() as f64
        };

        let mut tape = Tape::new();
        let xid = tape.leaf(x.clone());
        let params = mlp.register_params(&mut tape);
        let out = mlp.forward_tape(&mut tape, xid, &params);
        let sq = tape.mul(out, out);
        let loss = tape.mean_row_sum(sq);
        tape.backward(loss).unwrap();

        let h = 1e-5;
        let mut worst = 0.0_f64;
        for (pi, &pid) in params.iter().enumerate() {
            let analytic = tape.grad(pid).unwrap();
            let layer = pi / 2;
            let is_w = pi % 2 == 0;
            let dim = analytic.raw_dim();
            for r in 0..dim[0] {
                for c in 0..dim[1] {
                    let mut plus = mlp.clone();
                    let mut minus = mlp.clone();
                    if is_w {
                        plus.layers[layer].w[(r, c)] += h;
                        minus.layers[layer].w[(r, c)] -= h;
                    } else {
                        plus.layers[layer].b[(r, c)] += h;
                        minus.layers[layer].b[(r, c)] -= h;
                    }
                    let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                    let a = analytic[(r, c)];
                    if a.abs() > 1e-8 {
                        let rel = (a - numeric).abs() / a.abs().max(numeric.abs());
                        worst = worst.max(rel);
                    }
                }
            }
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn random_net_gradients_match_central_differences() {
        finite_diff_check(
            &[5, 16, 12, 4],
            &[Activation::LeakyRelu, Activation::Elu, Activation::Linear],
            8,
            3,
        );
        finite_diff_check(&[3, 8, 2], &[Activation::Elu, Activation::Linear], 4, 11);
    }

    #[test]
    fn clamp_blocks_gradient_outside_range() {
        let mut tape = Tape::new();
        let p = tape.param(array![[-12.0, 0.5, 12.0]]);
        let c = tape.clamp(p, -10.0, 10.0);
        let loss = tape.mean_row_sum(c);
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad(p).unwrap(), array![[0.0, 1.0, 0.0]]);
    }
}
