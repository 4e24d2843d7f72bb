//! Model container, configuration, and persistence.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{concatenate, Array1, Axis};

use crate::aux::Locations;
use crate::error::{Error, Result};
use crate::nn::{io as nnio, Activation, LrSchedule, Mat, Mlp};
use crate::seed;

/// Log-variances are clamped to this range before exponentiation.
pub(crate) const LOGVAR_CLAMP: f64 = 10.0;

/// Training and architecture configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct IvaeConfig {
    pub latent_dim: usize,
    /// Hidden widths of encoder and decoder.
    pub hidden: Vec<usize>,
    /// Hidden widths of the auxiliary network (one 16-unit layer gives the
    /// low-capacity trend estimator used for spatial prediction).
    pub aux_hidden: Vec<usize>,
    /// Reconstruction variance of `N(x | x', beta I)`.
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub schedule: LrSchedule,
    pub seed: u64,
}

impl IvaeConfig {
    pub fn new(latent_dim: usize) -> IvaeConfig {
        IvaeConfig {
            latent_dim,
            hidden: vec![128, 128, 128],
            aux_hidden: vec![128, 128, 128],
            beta: 0.02,
            epochs: 60,
            batch_size: 64,
            schedule: LrSchedule::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::Config("latent dimension must be >= 1".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        self.schedule.validate()
    }
}

/// Trained (or freshly initialized) model with input standardization
/// constants.
#[derive(Debug, Clone)]
pub struct IvaeModel {
    /// `(S + m) -> 2P`: posterior mean and log-variance.
    pub encoder: Mlp,
    /// `P -> S` reconstruction.
    pub decoder: Mlp,
    /// `m -> 2P`: prior mean and log-variance given the auxiliary variable.
    pub aux_net: Mlp,
    pub cfg: IvaeConfig,
    pub x_mean: Array1<f64>,
    pub x_sd: Array1<f64>,
}

impl IvaeModel {
    /// Fresh model for `S` observed and `m` auxiliary dimensions. Weights are
    /// seeded from `cfg.seed`; standardization constants start at identity.
    pub fn new(s_dim: usize, m_dim: usize, cfg: &IvaeConfig) -> Result<IvaeModel> {
        cfg.validate()?;
        let p = cfg.latent_dim;
        let leaky = Activation::LeakyRelu;

        let mut enc_sizes = vec![s_dim + m_dim];
        enc_sizes.extend(&cfg.hidden);
        enc_sizes.push(2 * p);
        let mut enc_acts = vec![leaky; cfg.hidden.len()];
        enc_acts.push(Activation::Linear);

        let mut dec_sizes = vec![p];
        dec_sizes.extend(&cfg.hidden);
        dec_sizes.push(s_dim);
        let dec_acts = enc_acts.clone();

        let mut aux_sizes = vec![m_dim];
        aux_sizes.extend(&cfg.aux_hidden);
        aux_sizes.push(2 * p);
        let mut aux_acts = vec![leaky; cfg.aux_hidden.len()];
        aux_acts.push(Activation::Linear);

        Ok(IvaeModel {
            encoder: Mlp::new(&enc_sizes, &enc_acts, seed::derive(cfg.seed, "encoder"))?,
            decoder: Mlp::new(&dec_sizes, &dec_acts, seed::derive(cfg.seed, "decoder"))?,
            aux_net: Mlp::new(&aux_sizes, &aux_acts, seed::derive(cfg.seed, "aux"))?,
            cfg: cfg.clone(),
            x_mean: Array1::zeros(s_dim),
            x_sd: Array1::ones(s_dim),
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.cfg.latent_dim
    }

    pub fn observed_dim(&self) -> usize {
        self.decoder.out_dim()
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_net.in_dim()
    }

    /// Standardize raw observations with the stored constants.
    pub fn standardize(&self, x: &Mat) -> Result<Mat> {
        if x.ncols() != self.observed_dim() {
            return Err(Error::Dim(format!(
                "x has {} columns, model expects {}",
                x.ncols(),
                self.observed_dim()
            )));
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.x_mean[j], self.x_sd[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    /// Undo standardization on model-scale observations.
    pub fn destandardize(&self, x_std: &Mat) -> Mat {
        let mut out = x_std.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.x_mean[j], self.x_sd[j]);
            col.mapv_inplace(|v| v * s + m);
        }
        out
    }

    /// Concatenate observations (standardized) and auxiliary variables as
    /// encoder input.
    pub(crate) fn encoder_input(&self, x_std: &Mat, u: &Mat) -> Mat {
        concatenate![Axis(1), x_std.view(), u.view()]
    }

    /// Decode latent rows back to observation space (decoder then
    /// de-standardization).
    pub fn decode(&self, z: &Mat) -> Result<Mat> {
        if z.ncols() != self.latent_dim() {
            return Err(Error::Dim(format!(
                "z has {} columns, model has latent dimension {}",
                z.ncols(),
                self.latent_dim()
            )));
        }
        Ok(self.destandardize(&self.decoder.forward(z)?))
    }
}

/// Extracted latent representation and training trace.
#[derive(Debug, Clone)]
pub struct LatentResult {
    /// `n x P` posterior means (the recovered components).
    pub sources: Mat,
    /// `n x P` prior means from the auxiliary network (smooth trend).
    pub trend: Mat,
    /// `n x P` prior standard deviations from the auxiliary network.
    pub trend_sd: Mat,
    /// Full-data mean ELBO after each epoch (empty when not from training).
    pub elbo_history: Vec<f64>,
    /// Final full-data mean ELBO (from training).
    pub final_elbo: Option<f64>,
}

/// Write a latent result as CSV: location columns, components, trend, sd.
pub fn write_latent_csv(path: &Path, loc: &Locations, res: &LatentResult) -> Result<()> {
    if loc.len() != res.sources.nrows() {
        return Err(Error::Dim("locations and latent rows differ".into()));
    }
    let d = loc.spatial_dim();
    let p = res.sources.ncols();
    let mut out = BufWriter::new(File::create(path)?);
    let mut header: Vec<String> = (1..=d).map(|i| format!("s{i}")).collect();
    header.push("t".into());
    header.extend((1..=p).map(|i| format!("ic{i}")));
    header.extend((1..=p).map(|i| format!("trend{i}")));
    header.extend((1..=p).map(|i| format!("sd{i}")));
    writeln!(out, "{}", header.join(","))?;
    for i in 0..loc.len() {
        let mut fields: Vec<String> = (0..d).map(|j| format!("{}", loc.coords[(i, j)])).collect();
        fields.push(format!("{}", loc.times[i]));
        for j in 0..p {
            fields.push(format!("{}", res.sources[(i, j)]));
        }
        for j in 0..p {
            fields.push(format!("{}", res.trend[(i, j)]));
        }
        for j in 0..p {
            fields.push(format!("{}", res.trend_sd[(i, j)]));
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Save weights (binary container) plus a plain-text sidecar holding the
/// configuration and standardization constants.
pub fn save_model(model: &IvaeModel, weights: &Path, sidecar: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(weights)?);
    nnio::write_mlps(&mut w, &[&model.encoder, &model.decoder, &model.aux_net])?;
    w.flush()?;

    let joined = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let floats = |v: &Array1<f64>| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
    let cfg = &model.cfg;
    let mut s = BufWriter::new(File::create(sidecar)?);
    writeln!(s, "latent_dim={}", cfg.latent_dim)?;
    writeln!(s, "hidden={}", joined(&cfg.hidden))?;
    writeln!(s, "aux_hidden={}", joined(&cfg.aux_hidden))?;
    writeln!(s, "beta={}", cfg.beta)?;
    writeln!(s, "epochs={}", cfg.epochs)?;
    writeln!(s, "batch_size={}", cfg.batch_size)?;
    writeln!(s, "lr_initial={}", cfg.schedule.initial)?;
    writeln!(s, "lr_final={}", cfg.schedule.final_rate)?;
    writeln!(s, "lr_horizon={}", cfg.schedule.horizon)?;
    writeln!(s, "lr_power={}", cfg.schedule.power)?;
    writeln!(s, "seed={}", cfg.seed)?;
    writeln!(s, "x_mean={}", floats(&model.x_mean))?;
    writeln!(s, "x_sd={}", floats(&model.x_sd))?;
    s.flush()?;
    Ok(())
}

fn parse_kv(text: &str) -> std::collections::BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| {
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                return None;
            }
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Load a model saved by [`save_model`].
pub fn load_model(weights: &Path, sidecar: &Path) -> Result<IvaeModel> {
    let mut r = BufReader::new(File::open(weights)?);
    let mlps = nnio::read_mlps(&mut r)?;
    if mlps.len() != 3 {
        return Err(Error::Data(format!(
            "model container holds {} networks, expected 3",
            mlps.len()
        )));
    }
    let mut it = mlps.into_iter();
    let (encoder, decoder, aux_net) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());

    let text = std::fs::read_to_string(sidecar)?;
    let kv = parse_kv(&text);
    let get = |k: &str| -> Result<&String> {
        kv.get(k)
            .ok_or_else(|| Error::Data(format!("sidecar is missing key `{k}`")))
    };
    let usizes = |s: &str| -> Result<Vec<usize>> {
        s.split(',')
            .filter(|t| !t.is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Data(format!("bad list: {e}"))))
            .collect()
    };
    let floats = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .filter(|t| !t.is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Data(format!("bad list: {e}"))))
            .collect()
    };
    let parse = |k: &str| -> Result<f64> {
        get(k)?.parse::<f64>().map_err(|e| Error::Data(format!("bad `{k}`: {e}")))
    };

    let cfg = IvaeConfig {
        latent_dim: parse("latent_dim")? as usize,
        hidden: usizes(get("hidden")?)?,
        aux_hidden: usizes(get("aux_hidden")?)?,
        beta: parse("beta")?,
        epochs: parse("epochs")? as usize,
        batch_size: parse("batch_size")? as usize,
        schedule: LrSchedule {
            initial: parse("lr_initial")?,
            final_rate: parse("lr_final")?,
            horizon: parse("lr_horizon")? as u64,
            power: parse("lr_power")? as u32,
        },
        seed: parse("seed")? as u64,
    };
    cfg.validate()?;
    let x_mean = Array1::from_vec(floats(get("x_mean")?)?);
    let x_sd = Array1::from_vec(floats(get("x_sd")?)?);
    if x_mean.len() != decoder.out_dim() || x_sd.len() != decoder.out_dim() {
        return Err(Error::Data("standardization constants do not match model width".into()));
    }
    Ok(IvaeModel {
        encoder,
        decoder,
        aux_net,
        cfg,
        x_mean,
        x_sd,
    })
}
