//! Simplified latent-space covariance machinery.
//!
//! Nonstationary spatio-temporal fields are generated by an order-1 vector
//! autoregression over the spatial sites,
//!
//! `delta(t) = rho_1 K_1 delta(t-1) + eps(t)`,
//!
//! where the spatial kernel `K_1` and the noise covariance both mix the
//! original coordinates with deformed "latent" coordinates through per-axis
//! scaling parameters, and the noise standard deviation can vary over space
//! and/or time.

use ndarray::Array1;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::nn::Mat;
use crate::simgen::field::{cholesky_jittered, JITTER_MAX, JITTER_START};
use crate::simgen::matern::{matern_cov, MaternParams};
use crate::simgen::swirl::SwirlParams;

/// How the noise standard deviation varies over space and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceMode {
    Constant,
    /// `sigma = exp(theta * (latent_s1 - 0.5))`
    Space { theta: f64 },
    /// `sigma = exp(sin((t + t1) * t2) / 2)`
    Time { t1: f64, t2: f64 },
    /// Product of the space and time factors.
    SpaceTime { theta: f64, t1: f64, t2: f64 },
}

impl VarianceMode {
    /// Noise sd at a site with latent first coordinate `lat1` and time `t`.
    pub fn sigma(&self, lat1: f64, t: f64) -> f64 {
        match *self {
            VarianceMode::Constant => 1.0,
            VarianceMode::Space { theta } => (theta * (lat1 - 0.5)).exp(),
            VarianceMode::Time { t1, t2 } => (((t + t1) * t2).sin() / 2.0).exp(),
            VarianceMode::SpaceTime { theta, t1, t2 } => {
                (theta * (lat1 - 0.5) + ((t + t1) * t2).sin() / 2.0).exp()
            }
        }
    }
}

/// All generator parameters for one latent component.
#[derive(Debug, Clone)]
pub struct IlsaComponent {
    /// Kernel scalings for the two spatial axes.
    pub theta_s_r: [f64; 2],
    /// Kernel scalings for the latent axes.
    pub theta_lat_r: Vec<f64>,
    /// Noise quadratic-form scalings for the spatial axes.
    pub theta_s: [f64; 2],
    /// Noise quadratic-form scalings for the latent axes (zeros allowed).
    pub theta_lat: Vec<f64>,
    pub rho1: f64,
    pub swirl: SwirlParams,
    pub matern: MaternParams,
    pub variance: VarianceMode,
}

impl IlsaComponent {
    pub fn validate(&self) -> Result<()> {
        if self.rho1.abs() >= 1.0 {
            return Err(Error::Config(format!("|rho1| must be < 1, got {}", self.rho1)));
        }
        let nonneg = self
            .theta_s_r
            .iter()
            .chain(self.theta_lat_r.iter())
            .chain(self.theta_s.iter())
            .chain(self.theta_lat.iter())
            .all(|&v| v >= 0.0);
        if !nonneg {
            return Err(Error::Config("theta scaling entries must be >= 0".into()));
        }
        Ok(())
    }
}

fn axis_sq_form(a: &[f64], b: &[f64], theta: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(theta)
        .map(|((x, y), th)| {
            let d = (x - y).abs();
            th * d * d
        })
        .sum()
}

/// Spatial kernel matrix `K_r`: determinant-normalized Gaussian of the
/// per-axis quadratic form over original and latent coordinates.
pub fn ilsa_kernel(
    coords: &Mat,
    latent: &Mat,
    theta_s_r: &[f64; 2],
    theta_lat_r: &[f64],
) -> Result<Mat> {
    let n = coords.nrows();
    if latent.nrows() != n {
        return Err(Error::Dim("coords and latent coords differ in rows".into()));
    }
    if latent.ncols() != theta_lat_r.len() {
        return Err(Error::Dim(format!(
            "{} latent axes but {} latent scalings",
            latent.ncols(),
            theta_lat_r.len()
        )));
    }
    let det: f64 = theta_s_r.iter().chain(theta_lat_r.iter()).product();
    if theta_s_r.iter().chain(theta_lat_r.iter()).any(|&v| v == 0.0) {
        return Err(Error::Config(
            "kernel scaling entries must be nonzero (singular determinant factor)".into(),
        ));
    }
    let scale = det.powf(-0.5);
    let mut k = Mat::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let q = axis_sq_form(
                coords.row(i).as_slice().unwrap(),
                coords.row(j).as_slice().unwrap(),
                theta_s_r,
            ) + axis_sq_form(
                latent.row(i).as_slice().unwrap(),
                latent.row(j).as_slice().unwrap(),
                theta_lat_r,
            );
            let v = scale * (-q).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Deformed distance for the noise covariance: square root of the per-axis
/// quadratic form with the (possibly zero) noise scalings.
pub fn q_distance(coords: &Mat, latent: &Mat, theta_s: &[f64; 2], theta_lat: &[f64], i: usize, j: usize) -> f64 {
    (axis_sq_form(
        coords.row(i).as_slice().unwrap(),
        coords.row(j).as_slice().unwrap(),
        theta_s,
    ) + axis_sq_form(
        latent.row(i).as_slice().unwrap(),
        latent.row(j).as_slice().unwrap(),
        theta_lat,
    ))
    .sqrt()
}

/// Noise covariance at time `t`:
/// `sigma_i(t) sigma_j(t) V(Q(i, j))` with `V` the Matérn correlation.
pub fn ilsa_noise_cov(coords: &Mat, latent: &Mat, comp: &IlsaComponent, t: f64) -> Result<Mat> {
    comp.validate()?;
    let n = coords.nrows();
    if latent.nrows() != n {
        return Err(Error::Dim("coords and latent coords differ in rows".into()));
    }
    let sigmas: Vec<f64> = (0..n)
        .map(|i| comp.variance.sigma(latent[(i, 0)], t))
        .collect();
    let mut cov = Mat::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let q = q_distance(coords, latent, &comp.theta_s, &comp.theta_lat, i, j);
            let v = sigmas[i] * sigmas[j] * matern_cov(q, &comp.matern);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Spectral radius of a symmetric matrix by power iteration.
pub fn spectral_radius(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut v = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = m.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w / norm;
    }
    lambda
}

const BURN_IN: usize = 50;

/// One latent component over `n_s` sites and times `1..=n_t` (time-major:
/// all sites at t=1 first). Burn-in of 50 steps is discarded; the initial
/// state is a draw from the noise distribution. If `rho_1 K_1` has spectral
/// radius >= 1 the kernel is rescaled to radius 0.99 with a warning.
pub fn gen_ilsa_component<R: Rng>(
    coords: &Mat,
    comp: &IlsaComponent,
    n_t: usize,
    rng: &mut R,
) -> Result<Array1<f64>> {
    comp.validate()?;
    let n_s = coords.nrows();
    let latent = crate::simgen::swirl::swirl(coords, &comp.swirl);
    let mut k1 = ilsa_kernel(coords, &latent, &comp.theta_s_r, &comp.theta_lat_r)?;

    let radius = comp.rho1.abs() * spectral_radius(&k1);
    if radius >= 1.0 {
        eprintln!(
            "warning: vector AR unstable (spectral radius {radius:.3}); rescaling kernel to 0.99"
        );
        k1.mapv_inplace(|v| v * 0.99 / radius);
    }
    let ar = k1.mapv(|v| v * comp.rho1);

    // V(Q) is time-invariant; factor once, rescale by sigma(t) per draw.
    let mut corr = Mat::zeros((n_s, n_s));
    for i in 0..n_s {
        for j in 0..=i {
            let q = q_distance(coords, &latent, &comp.theta_s, &comp.theta_lat, i, j);
            let v = matern_cov(q, &comp.matern);
            corr[(i, j)] = v;
            corr[(j, i)] = v;
        }
    }
    let (l, _) = cholesky_jittered(&corr, JITTER_START, JITTER_MAX)?;

    let draw_noise = |rng: &mut R, t: f64| -> Array1<f64> {
        let xi: Array1<f64> =
            Array1::from_iter((0..n_s).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let mut e = l.dot(&xi);
        for i in 0..n_s {
            e[i] *= comp.variance.sigma(latent[(i, 0)], t);
        }
        e
    };

    let mut state = draw_noise(rng, 1.0 - BURN_IN as f64);
    for b in 1..BURN_IN {
        let t = 1.0 - (BURN_IN - b) as f64;
        state = ar.dot(&state) + draw_noise(rng, t);
    }

    let mut out = Array1::zeros(n_s * n_t);
    for t in 1..=n_t {
        state = ar.dot(&state) + draw_noise(rng, t as f64);
        for i in 0..n_s {
            out[(t - 1) * n_s + i] = state[i];
        }
    }
    Ok(out)
}
