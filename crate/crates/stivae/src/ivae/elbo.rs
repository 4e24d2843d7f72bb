//! The evidence lower bound: direct evaluation and taped construction.
//!
//! Two code paths compute the same objective. The direct path uses plain
//! forward passes and closed forms (used for epoch evaluation and in
//! finite-difference tests); the taped path records the computation for
//! reverse-mode gradients (used by the training loop). The gradient-check
//! invariant ties the two together.

use ndarray::s;

use crate::error::{Error, Result};
use crate::ivae::model::{IvaeModel, LOGVAR_CLAMP};
use crate::nn::{Mat, Tape, VarId};

/// ELBO decomposition, each term a per-observation batch mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElboTerms {
    pub elbo: f64,
    pub recon: f64,
    pub kl: f64,
}

fn check_shapes(model: &IvaeModel, x: &Mat, u: &Mat, noise: &Mat) -> Result<()> {
    let p = model.latent_dim();
    if x.nrows() != u.nrows() || x.nrows() != noise.nrows() {
        return Err(Error::Dim(format!(
            "batch rows disagree: x {}, u {}, noise {}",
            x.nrows(),
            u.nrows(),
            noise.nrows()
        )));
    }
    if x.ncols() != model.observed_dim() {
        return Err(Error::Dim(format!(
            "x has {} columns, model expects {}",
            x.ncols(),
            model.observed_dim()
        )));
    }
    if u.ncols() != model.aux_dim() {
        return Err(Error::Dim(format!(
            "u has {} columns, model expects {}",
            u.ncols(),
            model.aux_dim()
        )));
    }
    if noise.ncols() != p {
        return Err(Error::Dim(format!(
            "noise has {} columns, latent dimension is {p}",
            noise.ncols()
        )));
    }
    Ok(())
}

/// Gaussian log-density constant of the reconstruction term.
fn recon_const(s_dim: usize, beta: f64) -> f64 {
    -(s_dim as f64 / 2.0) * (2.0 * std::f64::consts::PI * beta).ln()
}

/// Direct ELBO evaluation on standardized observations.
pub(crate) fn elbo_terms_std(model: &IvaeModel, x_std: &Mat, u: &Mat, noise: &Mat) -> Result<ElboTerms> {
    check_shapes(model, x_std, u, noise)?;
    let p = model.latent_dim();
    let batch = x_std.nrows() as f64;
    let beta = model.cfg.beta;

    let enc_out = model.encoder.forward(&model.encoder_input(x_std, u))?;
    let mu1 = enc_out.slice(s![.., 0..p]);
    let lv1 = enc_out
        .slice(s![.., p..2 * p])
        .mapv(|v| v.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP));
    let sigma1 = lv1.mapv(|v| (0.5 * v).exp());
    let z = &mu1.to_owned() + &(&sigma1 * noise);
    let x_prime = model.decoder.forward(&z)?;

    let mut ssq = 0.0;
    for (a, b) in x_std.iter().zip(x_prime.iter()) {
        ssq += (a - b) * (a - b);
    }
    let recon = recon_const(model.observed_dim(), beta) - ssq / (2.0 * beta * batch);

    let aux_out = model.aux_net.forward(u)?;
    let mu0 = aux_out.slice(s![.., 0..p]);
    let lv0 = aux_out
        .slice(s![.., p..2 * p])
        .mapv(|v| v.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP));
    let mut kl_sum = 0.0;
    for i in 0..x_std.nrows() {
        for c in 0..p {
            let a = lv0[(i, c)] - lv1[(i, c)];
            let d = mu1[(i, c)] - mu0[(i, c)];
            kl_sum += a + (-a).exp() + d * d * (-lv0[(i, c)]).exp() - 1.0;
        }
    }
    let kl = 0.5 * kl_sum / batch;
    let terms = ElboTerms {
        elbo: recon - kl,
        recon,
        kl,
    };
    for (name, v) in [("elbo", terms.elbo), ("recon", terms.recon), ("kl", terms.kl)] {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("non-finite {name} term in ELBO")));
        }
    }
    Ok(terms)
}

/// ELBO of a raw-scale batch: `(elbo, recon, kl)` as batch means. The
/// observations are standardized with the model's constants first.
pub fn elbo_batch(model: &IvaeModel, x: &Mat, u: &Mat, noise: &Mat) -> Result<ElboTerms> {
    let x_std = model.standardize(x)?;
    elbo_terms_std(model, &x_std, u, noise)
}

/// Parameter ids of the three networks on a tape, in canonical order.
pub(crate) struct TapedParams {
    pub encoder: Vec<VarId>,
    pub decoder: Vec<VarId>,
    pub aux_net: Vec<VarId>,
}

impl TapedParams {
    pub fn all(&self) -> impl Iterator<Item = VarId> + '_ {
        self.encoder
            .iter()
            .chain(self.decoder.iter())
            .chain(self.aux_net.iter())
            .copied()
    }
}

/// Record the negative ELBO of a standardized batch on a tape. Returns the
/// parameter ids, the loss node, and the (elbo, recon, kl) node ids.
pub(crate) fn build_elbo_tape(
    model: &IvaeModel,
    tape: &mut Tape,
    x_std: &Mat,
    u: &Mat,
    noise: &Mat,
) -> Result<(TapedParams, VarId, [VarId; 3])> {
    check_shapes(model, x_std, u, noise)?;
    let p = model.latent_dim();
    let beta = model.cfg.beta;

    let params = TapedParams {
        encoder: model.encoder.register_params(tape),
        decoder: model.decoder.register_params(tape),
        aux_net: model.aux_net.register_params(tape),
    };

    let xu = tape.leaf(model.encoder_input(x_std, u));
    let x_leaf = tape.leaf(x_std.to_owned());
    let u_leaf = tape.leaf(u.to_owned());
    let eps = tape.leaf(noise.to_owned());

    let enc_out = model.encoder.forward_tape(tape, xu, &params.encoder);
    let mu1 = tape.cols(enc_out, 0, p);
    let lv1_raw = tape.cols(enc_out, p, p);
    let lv1 = tape.clamp(lv1_raw, -LOGVAR_CLAMP, LOGVAR_CLAMP);
    let half_lv1 = tape.scale(lv1, 0.5);
    let sigma1 = tape.exp(half_lv1);
    let sz = tape.mul(sigma1, eps);
    let z = tape.add(mu1, sz);

    let x_prime = model.decoder.forward_tape(tape, z, &params.decoder);
    let diff = tape.sub(x_leaf, x_prime);
    let sq = tape.mul(diff, diff);
    let mssq = tape.mean_row_sum(sq);
    let scaled = tape.scale(mssq, -1.0 / (2.0 * beta));
    let recon = tape.add_const(scaled, recon_const(model.observed_dim(), beta));

    let aux_out = model.aux_net.forward_tape(tape, u_leaf, &params.aux_net);
    let mu0 = tape.cols(aux_out, 0, p);
    let lv0_raw = tape.cols(aux_out, p, p);
    let lv0 = tape.clamp(lv0_raw, -LOGVAR_CLAMP, LOGVAR_CLAMP);

    let a = tape.sub(lv0, lv1);
    let neg_a = tape.scale(a, -1.0);
    let ratio = tape.exp(neg_a);
    let d = tape.sub(mu1, mu0);
    let dsq = tape.mul(d, d);
    let neg_lv0 = tape.scale(lv0, -1.0);
    let inv_var0 = tape.exp(neg_lv0);
    let mahal = tape.mul(dsq, inv_var0);
    let sum1 = tape.add(a, ratio);
    let sum2 = tape.add(sum1, mahal);
    let kl_mat = tape.add_const(sum2, -1.0);
    let kl_sum = tape.mean_row_sum(kl_mat);
    let kl = tape.scale(kl_sum, 0.5);

    let elbo = tape.sub(recon, kl);
    let loss = tape.scale(elbo, -1.0);
    Ok((params, loss, [elbo, recon, kl]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivae::model::IvaeConfig;
    use ndarray::array;

    fn tiny_model(s_dim: usize, m_dim: usize, p: usize, seed: u64) -> IvaeModel {
        let cfg = IvaeConfig {
            hidden: vec![4],
            aux_hidden: vec![4],
            seed,
            ..IvaeConfig::new(p)
        };
        IvaeModel::new(s_dim, m_dim, &cfg).unwrap()
    }

    /// Overwrite the encoder and auxiliary nets so both output fixed
    /// (mu, logvar) rows regardless of input.
    fn pin_outputs(model: &mut IvaeModel, enc: &[f64], aux: &[f64]) {
        for (net, target) in [(&mut model.encoder, enc), (&mut model.aux_net, aux)] {
            for layer in net.layers.iter_mut() {
                layer.w.fill(0.0);
                layer.b.fill(0.0);
            }
            let last = net.layers.len() - 1;
            for (j, &v) in target.iter().enumerate() {
                net.layers[last].b[(0, j)] = v;
            }
        }
    }

    #[test]
    fn equal_posterior_and_prior_gives_zero_kl() {
        let mut model = tiny_model(2, 3, 1, 5);
        pin_outputs(&mut model, &[0.7, -0.3], &[0.7, -0.3]);
        let x = array![[0.1, 0.2]];
        let u = array![[0.0, 0.0, 0.0]];
        let noise = array![[0.0]];
        let t = elbo_batch(&model, &x, &u, &noise).unwrap();
        assert!(t.kl.abs() < 1e-12, "kl = {}", t.kl);
    }

    #[test]
    fn unit_gaussians_one_apart_give_half_nat_kl() {
        let mut model = tiny_model(2, 3, 1, 6);
        pin_outputs(&mut model, &[0.0, 0.0], &[1.0, 0.0]);
        let x = array![[0.0, 0.0]];
        let u = array![[0.0, 0.0, 0.0]];
        let noise = array![[0.0]];
        let t = elbo_batch(&model, &x, &u, &noise).unwrap();
        assert!((t.kl - 0.5).abs() < 1e-12, "kl = {}", t.kl);
    }

    #[test]
    fn exact_reconstruction_leaves_only_the_constant() {
        // zero-weight decoder reconstructs 0; x = 0 on the model scale
        let mut model = tiny_model(2, 3, 1, 7);
        for layer in &mut model.decoder.layers {
            layer.w.fill(0.0);
            layer.b.fill(0.0);
        }
        let x = Mat::zeros((4, 2));
        let u = Mat::zeros((4, 3));
        let noise = Mat::zeros((4, 1));
        let t = elbo_batch(&model, &x, &u, &noise).unwrap();
        let expected = -(2.0 / 2.0) * (2.0 * std::f64::consts::PI * 0.02).ln();
        assert!((t.recon - expected).abs() < 1e-12, "recon = {}", t.recon);
    }

    #[test]
    fn kl_is_nonnegative_for_random_models() {
        for seed in 0..20 {
            let model = tiny_model(3, 4, 2, seed);
            let mut rng = crate::seed::rng(seed, "kl-batch");
            use rand::Rng;
            let x = Mat::from_shape_fn((6, 3), |_| rng.gen_range(-2.0..2.0));
            let u = Mat::from_shape_fn((6, 4), |_| rng.gen_range(0.0..1.0));
            let noise = Mat::from_shape_fn((6, 2), |_| rng.gen_range(-1.0..1.0));
            let t = elbo_batch(&model, &x, &u, &noise).unwrap();
            assert!(t.kl >= 0.0, "kl = {}", t.kl);
        }
    }

    #[test]
    fn taped_elbo_matches_direct_evaluation() {
        let model = tiny_model(3, 4, 2, 9);
        let mut rng = crate::seed::rng(9, "agree");
        use rand::Rng;
        let x = Mat::from_shape_fn((5, 3), |_| rng.gen_range(-2.0..2.0));
        let u = Mat::from_shape_fn((5, 4), |_| rng.gen_range(0.0..1.0));
        let noise = Mat::from_shape_fn((5, 2), |_| rng.gen_range(-1.5..1.5));
        let x_std = model.standardize(&x).unwrap();
        let direct = elbo_terms_std(&model, &x_std, &u, &noise).unwrap();
        let mut tape = Tape::new();
        let (_, loss, [elbo, recon, kl]) =
            build_elbo_tape(&model, &mut tape, &x_std, &u, &noise).unwrap();
        assert!((tape.scalar(elbo) - direct.elbo).abs() < 1e-12);
        assert!((tape.scalar(recon) - direct.recon).abs() < 1e-12);
        assert!((tape.scalar(kl) - direct.kl).abs() < 1e-12);
        assert!((tape.scalar(loss) + direct.elbo).abs() < 1e-12);
    }

    #[test]
    fn elbo_gradient_matches_central_differences() {
        // tiny model: P=1, S=2, widths 4, fixed reparametrization noise
        let model = tiny_model(2, 3, 1, 13);
        let mut rng = crate::seed::rng(13, "fd");
        use rand::Rng;
        let x = Mat::from_shape_fn((4, 2), |_| rng.gen_range(-1.0..1.0));
        let u = Mat::from_shape_fn((4, 3), |_| rng.gen_range(0.0..1.0));
        let noise = Mat::from_shape_fn((4, 1), |_| rng.gen_range(-1.0..1.0));
        let x_std = model.standardize(&x).unwrap();

        let mut tape = Tape::new();
        let (params, loss, _) = build_elbo_tape(&model, &mut tape, &x_std, &u, &noise).unwrap();
        tape.backward(loss).unwrap();

        let h = 1e-5;
        let nets: [&str; 3] = ["encoder", "decoder", "aux"];
        let ids = [&params.encoder, &params.decoder, &params.aux_net];
        let mut worst = 0.0_f64;
        for (net_i, net_ids) in ids.iter().enumerate() {
            for (pi, &pid) in net_ids.iter().enumerate() {
                let analytic = tape.grad(pid).unwrap();
                let dim = analytic.raw_dim();
                for r in 0..dim[0] {
                    for c in 0..dim[1] {
                        let loss_at = |delta: f64| -> f64 {
                            let mut m = model.clone();
                            let net = match net_i {
                                0 => &mut m.encoder,
                                1 => &mut m.decoder,
                                _ => &mut m.aux_net,
                            };
                            let layer = pi / 2;
                            if pi % 2 == 0 {
                                net.layers[layer].w[(r, c)] += delta;
                            } else {
                                net.layers[layer].b[(r, c)] += delta;
                            }
                            -elbo_terms_std(&m, &x_std, &u, &noise).unwrap().elbo
                        };
                        let numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
                        let a = analytic[(r, c)];
                        if a.abs() > 1e-8 {
                            let rel = (a - numeric).abs() / a.abs().max(numeric.abs());
                            worst = worst.max(rel);
                        }
                    }
                }
            }
            let _ = nets;
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }
}
