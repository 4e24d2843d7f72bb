//! Gaussian random field sampling via Cholesky factorization.

use ndarray::Array1;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::nn::Mat;
use crate::seed;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix;
/// `None` if a pivot fails.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky needs a square matrix");
    let mut l = Mat::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

pub const JITTER_START: f64 = 1e-8;
pub const JITTER_MAX: f64 = 1e-4;

/// Cholesky of `a + jitter * I`, doubling the jitter from `start` until the
/// factorization succeeds or `max` is exceeded. Returns the factor and the
/// jitter that worked.
pub fn cholesky_jittered(a: &Mat, start: f64, max: f64) -> Result<(Mat, f64)> {
    let n = a.nrows();
    let mut jitter = start;
    while jitter <= max {
        let mut aj = a.clone();
        for i in 0..n {
            aj[(i, i)] += jitter;
        }
        if let Some(l) = cholesky(&aj) {
            return Ok((l, jitter));
        }
        jitter *= 2.0;
    }
    Err(Error::Numeric(format!(
        "covariance matrix is not positive definite even with jitter {max}"
    )))
}

/// Reusable sampler for a fixed covariance matrix.
pub struct FieldSampler {
    l: Mat,
}

impl FieldSampler {
    /// Factor `cov + jitter I` (jitter from 1e-8 up to 1e-4).
    pub fn new(cov: &Mat) -> Result<FieldSampler> {
        let (l, _) = cholesky_jittered(cov, JITTER_START, JITTER_MAX)?;
        Ok(FieldSampler { l })
    }

    /// One zero-mean draw with the factored covariance.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Array1<f64> {
        let n = self.l.nrows();
        let xi: Array1<f64> = Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        self.l.dot(&xi)
    }

    /// The factor itself, for samplers that rescale per draw.
    pub fn factor(&self) -> &Mat {
        &self.l
    }
}

/// One seeded draw from a Gaussian field with covariance built by `cov_fn`
/// over the rows of `points`.
pub fn sample_gaussian_field(
    points: &Mat,
    cov_fn: impl Fn(&[f64], &[f64]) -> f64,
    seed_value: u64,
) -> Result<Array1<f64>> {
    let n = points.nrows();
    let mut cov = Mat::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v = cov_fn(
                points.row(i).as_slice().unwrap(),
                points.row(j).as_slice().unwrap(),
            );
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let sampler = FieldSampler::new(&cov)?;
    let mut rng = seed::rng(seed_value, "gaussian-field");
    Ok(sampler.draw(&mut rng))
}
