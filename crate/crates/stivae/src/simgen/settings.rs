//! The six latent-field simulation settings.
//!
//! All settings place `n_s` spatial sites uniformly on the unit square and
//! observe each site at times `1..=n_t` (rows are time-major). Settings 1-3
//! build nonstationarity from spatio-temporal clusters; Settings 4-6 use the
//! latent-coordinate vector autoregression of [`crate::simgen::ilsa`] with
//! variance varying over space (4), time (5), or both (6).

use ndarray::Array1;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::aux::Locations;
use crate::error::{Error, Result};
use crate::nn::Mat;
use crate::seed;
use crate::simgen::field::FieldSampler;
use crate::simgen::ilsa::{gen_ilsa_component, IlsaComponent, VarianceMode};
use crate::simgen::matern::{matern_cov, MaternParams};
use crate::simgen::swirl::SwirlParams;

/// Setting 1: three Voronoi clusters in space x five equal time segments,
/// each cell with its own mean and standard deviation per component.
#[derive(Debug, Clone)]
pub struct Setting1Params {
    pub centers: Mat,
    pub n_time_segments: usize,
    /// `(n_cells, P)` cell means.
    pub mu: Mat,
    /// `(n_cells, P)` cell standard deviations.
    pub sigma: Mat,
}

/// Setting 2: stationary Matérn spatial fields per component plus
/// per-time-segment iid shifts.
#[derive(Debug, Clone)]
pub struct Setting2Params {
    pub matern: Vec<MaternParams>,
    pub n_time_segments: usize,
    pub mu: Mat,
    pub sigma: Mat,
}

/// Setting 3: five Voronoi clusters in space, AR(1) in time per cluster.
#[derive(Debug, Clone)]
pub struct Setting3Params {
    pub centers: Mat,
    pub rho: Mat,
    pub mu: Mat,
    pub sigma: Mat,
}

/// All per-component generator parameters for Settings 4-6.
#[derive(Debug, Clone)]
pub struct IlsaSpec {
    pub components: Vec<IlsaComponent>,
}

pub fn setting1_params(p: usize, seed_value: u64) -> Setting1Params {
    let mut rng = seed::rng(seed_value, "setting1/params");
    let centers = Mat::from_shape_fn((3, 2), |_| rng.gen_range(0.0..1.0));
    let n_cells = 3 * 5;
    let mu = Mat::from_shape_fn((n_cells, p), |_| rng.gen_range(-5.0..5.0));
    let sigma = Mat::from_shape_fn((n_cells, p), |_| rng.gen_range(0.1..5.0));
    Setting1Params {
        centers,
        n_time_segments: 5,
        mu,
        sigma,
    }
}

/// Matérn parameters for the five reference components; further components
/// draw smoothness and range uniformly from the same bracket.
const SETTING2_MATERN: [(f64, f64); 5] = [(0.5, 0.30), (0.1, 0.25), (1.0, 0.35), (2.0, 0.20), (0.25, 0.15)];

pub fn setting2_params(p: usize, seed_value: u64) -> Setting2Params {
    let mut rng = seed::rng(seed_value, "setting2/params");
    let matern = (0..p)
        .map(|i| {
            if i < SETTING2_MATERN.len() {
                let (nu, phi) = SETTING2_MATERN[i];
                MaternParams { nu, phi }
            } else {
                MaternParams {
                    nu: rng.gen_range(0.1..2.0),
                    phi: rng.gen_range(0.15..0.35),
                }
            }
        })
        .collect();
    let n_seg = 10;
    let mu = Mat::from_shape_fn((n_seg, p), |_| rng.gen_range(-0.3..0.3));
    let sigma = Mat::from_shape_fn((n_seg, p), |_| rng.gen_range(0.0..0.4));
    Setting2Params {
        matern,
        n_time_segments: n_seg,
        mu,
        sigma,
    }
}

pub fn setting3_params(p: usize, seed_value: u64) -> Setting3Params {
    let mut rng = seed::rng(seed_value, "setting3/params");
    let centers = Mat::from_shape_fn((5, 2), |_| rng.gen_range(0.0..1.0));
    let rho = Mat::from_shape_fn((5, p), |_| rng.gen_range(0.05..0.95));
    let mu = Mat::from_shape_fn((5, p), |_| rng.gen_range(-1.0..1.0));
    let sigma = Mat::from_shape_fn((5, p), |_| rng.gen_range(0.1..5.0));
    Setting3Params {
        centers,
        rho,
        mu,
        sigma,
    }
}

/// The fixed five-component parameter table shared by Settings 4-6.
fn ilsa_table() -> Vec<([f64; 2], [f64; 2], [f64; 2], [f64; 2], f64, [f64; 2], f64, f64, f64, f64)> {
    use std::f64::consts::PI;
    vec![
        ([6.0, 4.0], [7.0, 7.0], [0.2, 0.7], [0.7, 0.2], 0.9, [0.5, 0.5], 0.7, 1.8 * PI, 0.25, 0.5),
        ([3.0, 6.0], [4.0, 7.0], [0.7, 0.2], [0.25, 0.5], 0.8, [0.7, 0.7], 0.4, 1.2 * PI, 0.2, 0.9),
        ([3.0, 3.0], [6.0, 3.0], [0.5, 0.5], [0.7, 0.0], 0.7, [0.3, 0.3], 0.2, 2.0 * PI, 0.05, 1.5),
        ([7.0, 3.0], [2.0, 6.0], [0.2, 0.4], [0.3, 0.7], 0.6, [0.7, 0.3], 1.0, 0.5 * PI, 0.1, 0.25),
        ([2.0, 1.0], [6.0, 2.0], [0.3, 0.3], [0.0, 0.7], 0.5, [0.3, 0.7], 0.9, 0.9 * PI, 0.15, 1.0),
    ]
}

const SIGMA_SPACE: [f64; 5] = [1.0, 2.0, 3.0, -1.0, -2.0];
const SIGMA_TIME: [(f64, f64); 5] = [(50.0, 0.1), (0.0, 0.05), (100.0, 0.005), (20.0, 0.01), (10.0, 0.03)];

fn variance_for(setting: u8, theta_space: f64, time: (f64, f64)) -> VarianceMode {
    match setting {
        4 => VarianceMode::Space { theta: theta_space },
        5 => VarianceMode::Time { t1: time.0, t2: time.1 },
        6 => VarianceMode::SpaceTime {
            theta: theta_space,
            t1: time.0,
            t2: time.1,
        },
        _ => VarianceMode::Constant,
    }
}

/// The fixed reference parameterization (`P = 5`) for Settings 4-6.
pub fn ilsa_table_spec(setting: u8) -> IlsaSpec {
    let components = ilsa_table()
        .into_iter()
        .enumerate()
        .map(|(i, (tsr, tlr, ts, tl, rho1, center, b, eta, nu, phi))| IlsaComponent {
            theta_s_r: tsr,
            theta_lat_r: tlr.to_vec(),
            theta_s: ts,
            theta_lat: tl.to_vec(),
            rho1,
            swirl: SwirlParams {
                center,
                b_swirl: b,
                eta,
            },
            matern: MaternParams { nu, phi },
            variance: variance_for(setting, SIGMA_SPACE[i], SIGMA_TIME[i]),
        })
        .collect();
    IlsaSpec { components }
}

/// Randomized parameterization for latent dimensions other than 5. Ranges
/// bracket the fixed reference table.
pub fn ilsa_random_spec(setting: u8, p: usize, seed_value: u64) -> IlsaSpec {
    use std::f64::consts::PI;
    let mut rng = seed::rng(seed_value, "ilsa/params");
    let components = (0..p)
        .map(|_| {
            let theta_space = rng.gen_range(1.0..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let time = (rng.gen_range(0.0..100.0), rng.gen_range(0.005..0.1));
            IlsaComponent {
                theta_s_r: [rng.gen_range(1.0..7.0), rng.gen_range(1.0..7.0)],
                theta_lat_r: vec![rng.gen_range(2.0..7.0), rng.gen_range(2.0..7.0)],
                theta_s: [rng.gen_range(0.2..0.7), rng.gen_range(0.2..0.7)],
                theta_lat: vec![rng.gen_range(0.0..0.7), rng.gen_range(0.0..0.7)],
                rho1: rng.gen_range(0.5..0.9),
                swirl: SwirlParams {
                    center: [rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7)],
                    b_swirl: rng.gen_range(0.2..1.0),
                    eta: rng.gen_range(0.5 * PI..2.0 * PI),
                },
                matern: MaternParams {
                    nu: rng.gen_range(0.05..0.25),
                    phi: rng.gen_range(0.25..1.5),
                },
                variance: variance_for(setting, theta_space, time),
            }
        })
        .collect();
    IlsaSpec { components }
}

/// Index of the nearest center (Voronoi cell) for each site.
pub fn voronoi_clusters(coords: &Mat, centers: &Mat) -> Vec<usize> {
    (0..coords.nrows())
        .map(|i| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..centers.nrows() {
                let dx = coords[(i, 0)] - centers[(c, 0)];
                let dy = coords[(i, 1)] - centers[(c, 1)];
                let d = dx * dx + dy * dy;
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn time_segment(t: usize, n_t: usize, n_segments: usize) -> usize {
    ((t - 1) * n_segments / n_t).min(n_segments - 1)
}

/// Uniform spatial sites replicated over times `1..=n_t`, time-major.
pub fn sample_locations(n_s: usize, n_t: usize, seed_value: u64) -> (Mat, Locations) {
    let mut rng = seed::rng(seed_value, "locations");
    let sites = Mat::from_shape_fn((n_s, 2), |_| rng.gen_range(0.0..1.0));
    let n = n_s * n_t;
    let mut coords = Mat::zeros((n, 2));
    let mut times = Array1::zeros(n);
    for t in 0..n_t {
        for i in 0..n_s {
            coords[(t * n_s + i, 0)] = sites[(i, 0)];
            coords[(t * n_s + i, 1)] = sites[(i, 1)];
            times[t * n_s + i] = (t + 1) as f64;
        }
    }
    (
        sites,
        Locations { coords, times },
    )
}

fn gen_setting1(sites: &Mat, n_t: usize, params: &Setting1Params, rng: &mut impl Rng) -> Mat {
    let n_s = sites.nrows();
    let p = params.mu.ncols();
    let clusters = voronoi_clusters(sites, &params.centers);
    let mut z = Mat::zeros((n_s * n_t, p));
    for t in 1..=n_t {
        let seg = time_segment(t, n_t, params.n_time_segments);
        for i in 0..n_s {
            let cell = clusters[i] * params.n_time_segments + seg;
            let row = (t - 1) * n_s + i;
            for c in 0..p {
                let e: f64 = rng.sample(StandardNormal);
                z[(row, c)] = params.mu[(cell, c)] + params.sigma[(cell, c)] * e;
            }
        }
    }
    z
}

fn gen_setting2(
    sites: &Mat,
    n_t: usize,
    params: &Setting2Params,
    rng: &mut impl Rng,
) -> Result<Mat> {
    let n_s = sites.nrows();
    let p = params.matern.len();
    let mut z = Mat::zeros((n_s * n_t, p));
    for (c, matern) in params.matern.iter().enumerate() {
        let mut cov = Mat::zeros((n_s, n_s));
        for i in 0..n_s {
            for j in 0..=i {
                let dx = sites[(i, 0)] - sites[(j, 0)];
                let dy = sites[(i, 1)] - sites[(j, 1)];
                let v = matern_cov((dx * dx + dy * dy).sqrt(), matern);
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        let sampler = FieldSampler::new(&cov)?;
        for t in 1..=n_t {
            let seg = time_segment(t, n_t, params.n_time_segments);
            let field = sampler.draw(rng);
            for i in 0..n_s {
                let e: f64 = rng.sample(StandardNormal);
                let row = (t - 1) * n_s + i;
                z[(row, c)] = field[i] + params.mu[(seg, c)] + params.sigma[(seg, c)] * e;
            }
        }
    }
    Ok(z)
}

fn gen_setting3(sites: &Mat, n_t: usize, params: &Setting3Params, rng: &mut impl Rng) -> Mat {
    let n_s = sites.nrows();
    let p = params.rho.ncols();
    let clusters = voronoi_clusters(sites, &params.centers);
    let mut z = Mat::zeros((n_s * n_t, p));
    for c in 0..p {
        for i in 0..n_s {
            let k = clusters[i];
            let (rho, mu, sigma) = (params.rho[(k, c)], params.mu[(k, c)], params.sigma[(k, c)]);
            let e0: f64 = rng.sample(StandardNormal);
            let mut state = mu + sigma * e0;
            z[(i, c)] = state;
            for t in 2..=n_t {
                let e: f64 = rng.sample(StandardNormal);
                state = rho * state + mu + sigma * e;
                z[((t - 1) * n_s + i, c)] = state;
            }
        }
    }
    z
}

fn gen_ilsa_setting(
    sites: &Mat,
    n_t: usize,
    spec: &IlsaSpec,
    rng: &mut impl Rng,
) -> Result<Mat> {
    let n_s = sites.nrows();
    let p = spec.components.len();
    let mut z = Mat::zeros((n_s * n_t, p));
    for (c, comp) in spec.components.iter().enumerate() {
        let col = gen_ilsa_component(sites, comp, n_t, rng)?;
        for (row, v) in col.iter().enumerate() {
            z[(row, c)] = *v;
        }
    }
    Ok(z)
}

/// Generate the latent field of setting `k` (1-6): `n_s * n_t` rows of `P`
/// components together with the locations. Fully determined by the seed.
pub fn gen_setting(k: u8, n_s: usize, n_t: usize, p: usize, seed_value: u64) -> Result<(Mat, Locations)> {
    if !(1..=6).contains(&k) {
        return Err(Error::Config(format!("unknown setting {k}; expected 1-6")));
    }
    if n_s < 2 || n_t < 2 {
        return Err(Error::Config("need at least 2 sites and 2 time points".into()));
    }
    if p == 0 {
        return Err(Error::Config("latent dimension must be >= 1".into()));
    }
    let (sites, loc) = sample_locations(n_s, n_t, seed_value);
    let mut rng = seed::rng(seed_value, &format!("setting{k}/z"));
    let z = match k {
        1 => gen_setting1(&sites, n_t, &setting1_params(p, seed_value), &mut rng),
        2 => gen_setting2(&sites, n_t, &setting2_params(p, seed_value), &mut rng)?,
        3 => gen_setting3(&sites, n_t, &setting3_params(p, seed_value), &mut rng),
        _ => {
            let spec = if p == 5 {
                ilsa_table_spec(k)
            } else {
                ilsa_random_spec(k, p, seed_value)
            };
            gen_ilsa_setting(&sites, n_t, &spec, &mut rng)?
        }
    };
    Ok((z, loc))
}
