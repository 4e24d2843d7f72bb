//! Adam optimizer with bias correction.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::nn::mlp::Mat;

/// Per-parameter first/second moment accumulators and the shared step count.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Mat>,
    v: Vec<Mat>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Accumulators shaped after `params`, step counter at zero. Defaults:
    /// `beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-8`.
    pub fn new(params: &[&Mat]) -> AdamState {
        AdamState {
            m: params.iter().map(|p| Array2::zeros(p.raw_dim())).collect(),
            v: params.iter().map(|p| Array2::zeros(p.raw_dim())).collect(),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One Adam update over all parameters. `names` label the parameters for
    /// error messages; `params`, `grads`, and the state must align.
    pub fn step(
        &mut self,
        params: &mut [&mut Mat],
        grads: &[Mat],
        names: &[String],
        lr: f64,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Dim(format!(
                "adam state holds {} parameters, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, g) in grads.iter().enumerate() {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite gradient in parameter `{}` at step {}",
                    names.get(i).map(String::as_str).unwrap_or("?"),
                    self.step + 1
                )));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (i, p) in params.iter_mut().enumerate() {
            debug_assert_eq!(p.raw_dim(), grads[i].raw_dim(), "parameter/grad shape");
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            m.zip_mut_with(&grads[i], |mv, &gv| {
                *mv = self.beta1 * *mv + (1.0 - self.beta1) * gv
            });
            v.zip_mut_with(&grads[i], |vv, &gv| {
                *vv = self.beta2 * *vv + (1.0 - self.beta2) * gv * gv
            });
            ndarray::Zip::from(&mut **p)
                .and(&*m)
                .and(&*v)
                .for_each(|pv, &mv, &vv| {
                    let mhat = mv / bc1;
                    let vhat = vv / bc2;
                    *pv -= lr * mhat / (vhat.sqrt() + self.eps);
                });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut p = array![[1.5, -2.0]];
        let orig = p.clone();
        let mut state = AdamState::new(&[&p]);
        let g = Array2::zeros((1, 2));
        for _ in 0..5 {
            state
                .step(&mut [&mut p], &[g.clone()], &["p".into()], 0.1)
                .unwrap();
        }
        assert_eq!(p, orig);
        assert_eq!(state.step, 5);
    }

    #[test]
    fn single_step_matches_hand_computation() {
        // param 0, grad 1, defaults, lr 0.1, step 1:
        // m=0.1, v=0.001, mhat=1, vhat=1 -> param = -0.1/(1+1e-8)
        let mut p = array![[0.0]];
        let mut state = AdamState::new(&[&p]);
        state
            .step(&mut [&mut p], &[array![[1.0]]], &["p".into()], 0.1)
            .unwrap();
        let expected = -0.1 / (1.0 + 1e-8);
        assert!((p[(0, 0)] - expected).abs() < 1e-15, "{}", p[(0, 0)]);
    }

    #[test]
    fn non_finite_gradient_names_the_parameter() {
        let mut p = array![[0.0]];
        let mut state = AdamState::new(&[&p]);
        let err = state
            .step(
                &mut [&mut p],
                &[array![[f64::NAN]]],
                &["encoder/layer0/w".into()],
                0.1,
            )
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("encoder/layer0/w"), "{msg}");
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let run = || {
            let mut p = array![[0.3, -0.7], [0.1, 0.9]];
            let mut state = AdamState::new(&[&p]);
            for k in 0..20 {
                let g = p.mapv(|v| v * 0.5 + k as f64 * 0.01);
                state
                    .step(&mut [&mut p], &[g], &["p".into()], 0.05)
                    .unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }
}
