//! Training loop and source extraction.

use ndarray::{s, Array1};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ivae::elbo::{build_elbo_tape, elbo_terms_std};
use crate::ivae::model::{IvaeConfig, IvaeModel, LatentResult, LOGVAR_CLAMP};
use crate::nn::{AdamState, Mat, Tape};
use crate::seed;

fn param_names(model: &IvaeModel) -> Vec<String> {
    let mut names = Vec::new();
    for (net, mlp) in [
        ("encoder", &model.encoder),
        ("decoder", &model.decoder),
        ("aux", &model.aux_net),
    ] {
        for l in 0..mlp.layers.len() {
            names.push(format!("{net}/layer{l}/w"));
            names.push(format!("{net}/layer{l}/b"));
        }
    }
    names
}

/// Fit an identifiable VAE to observations `x` (`n x S`, raw scale) with
/// auxiliary variables `u` (`n x m`). Deterministic given `(x, u, cfg)`.
///
/// Observations are standardized column-wise before training and the
/// constants stored on the model. Minibatches are reshuffled every epoch;
/// the ELBO reported per epoch is a deterministic full-data pass with a
/// fixed noise draw.
pub fn train(x: &Mat, u: &Mat, cfg: &IvaeConfig) -> Result<(IvaeModel, LatentResult)> {
    cfg.validate()?;
    let n = x.nrows();
    if n != u.nrows() {
        return Err(Error::Dim(format!(
            "x has {n} rows but u has {}",
            u.nrows()
        )));
    }
    if n < 2 {
        return Err(Error::Data("need at least 2 observations to train".into()));
    }
    let p = cfg.latent_dim;

    let mut model = IvaeModel::new(x.ncols(), u.ncols(), cfg)?;
    let nf = n as f64;
    model.x_mean = Array1::from_iter(x.columns().into_iter().map(|c| c.sum() / nf));
    model.x_sd = Array1::from_iter(x.columns().into_iter().enumerate().map(|(j, c)| {
        let m = model.x_mean[j];
        (c.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / nf).sqrt()
    }));
    if model.x_sd.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Data("an observed column is constant; cannot standardize".into()));
    }
    let x_std = model.standardize(x)?;

    let names = param_names(&model);
    let mut adam = {
        let mut refs: Vec<&Mat> = Vec::new();
        for mlp in [&model.encoder, &model.decoder, &model.aux_net] {
            for layer in &mlp.layers {
                refs.push(&layer.w);
                refs.push(&layer.b);
            }
        }
        AdamState::new(&refs)
    };

    let mut shuffle_rng = seed::rng(cfg.seed, "shuffle");
    let mut noise_rng = seed::rng(cfg.seed, "train-noise");
    let mut eval_rng = seed::rng(cfg.seed, "eval-noise");
    let eval_noise = Mat::from_shape_fn((n, p), |_| eval_rng.sample::<f64, _>(StandardNormal));

    let mut indices: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut step: u64 = 0;
    let mut bad_batches = 0u32;

    for epoch in 0..cfg.epochs {
        indices.shuffle(&mut shuffle_rng);
        for (batch_i, chunk) in indices.chunks(cfg.batch_size).enumerate() {
            let b = chunk.len();
            let mut xb = Mat::zeros((b, x_std.ncols()));
            let mut ub = Mat::zeros((b, u.ncols()));
            for (bi, &row) in chunk.iter().enumerate() {
                xb.slice_mut(s![bi, ..]).assign(&x_std.slice(s![row, ..]));
                ub.slice_mut(s![bi, ..]).assign(&u.slice(s![row, ..]));
            }
            let noise = Mat::from_shape_fn((b, p), |_| noise_rng.sample::<f64, _>(StandardNormal));

            let mut tape = Tape::new();
            let (params, loss, [elbo_id, ..]) =
                build_elbo_tape(&model, &mut tape, &xb, &ub, &noise)?;
            let elbo = tape.scalar(elbo_id);
            if !elbo.is_finite() {
                bad_batches += 1;
                if bad_batches >= 3 {
                    return Err(Error::Numeric(format!(
                        "ELBO diverged: non-finite for 3 consecutive batches \
                         (epoch {epoch}, batch {batch_i})"
                    )));
                }
                step += 1;
                continue;
            }
            bad_batches = 0;

            tape.backward(loss)?;
            let grads: Vec<Mat> = params
                .all()
                .map(|id| tape.grad(id))
                .collect::<Result<Vec<_>>>()?;
            let lr = cfg.schedule.lr_at(step);
            {
                let mut refs: Vec<&mut Mat> = Vec::new();
                for mlp in [&mut model.encoder, &mut model.decoder, &mut model.aux_net] {
                    for layer in &mut mlp.layers {
                        refs.push(&mut layer.w);
                        refs.push(&mut layer.b);
                    }
                }
                adam.step(&mut refs, &grads, &names, lr)?;
            }
            step += 1;
        }
        let terms = elbo_terms_std(&model, &x_std, u, &eval_noise)?;
        history.push(terms.elbo);
    }

    let mut result = extract_sources(&model, x, u)?;
    result.final_elbo = history.last().copied();
    result.elbo_history = history;
    Ok((model, result))
}

/// Extract sources, trend, and prior standard deviation for observations
/// `x` with auxiliary variables `u`. Pure: no sampling, repeated calls give
/// identical output.
pub fn extract_sources(model: &IvaeModel, x: &Mat, u: &Mat) -> Result<LatentResult> {
    if x.nrows() != u.nrows() {
        return Err(Error::Dim(format!(
            "x has {} rows but u has {}",
            x.nrows(),
            u.nrows()
        )));
    }
    let p = model.latent_dim();
    let x_std = model.standardize(x)?;
    let enc_out = model.encoder.forward(&model.encoder_input(&x_std, u))?;
    let sources = enc_out.slice(s![.., 0..p]).to_owned();
    let (trend, trend_sd) = trend_of(model, u)?;
    Ok(LatentResult {
        sources,
        trend,
        trend_sd,
        elbo_history: Vec::new(),
        final_elbo: None,
    })
}

/// Trend and prior sd surfaces from the auxiliary network alone.
pub(crate) fn trend_of(model: &IvaeModel, u: &Mat) -> Result<(Mat, Mat)> {
    let p = model.latent_dim();
    let aux_out = model.aux_net.forward(u)?;
    let trend = aux_out.slice(s![.., 0..p]).to_owned();
    let trend_sd = aux_out
        .slice(s![.., p..2 * p])
        .mapv(|v| (0.5 * v.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP)).exp());
    Ok((trend, trend_sd))
}
