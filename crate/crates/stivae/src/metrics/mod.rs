//! Performance indices: MCC for source recovery, (weighted) MSE/MAE for
//! predictions.

mod hungarian;

pub use hungarian::solve_lsap;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::nn::Mat;

/// Pearson correlation of two equally long slices. Zero-variance inputs give
/// a correlation of 0 (with a warning) so they can only depress MCC.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "correlation inputs must align");
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        eprintln!("warning: zero-variance component in correlation; treating as 0");
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Sample correlation matrix between the columns of `z` (true components)
/// and `zhat` (estimates): entry `(i, j) = cor(z_i, zhat_j)`.
pub fn corr_matrix(z: &Mat, zhat: &Mat) -> Result<Mat> {
    if z.nrows() != zhat.nrows() {
        return Err(Error::Dim(format!(
            "correlation needs equal row counts, got {} and {}",
            z.nrows(),
            zhat.nrows()
        )));
    }
    let p = z.ncols();
    let q = zhat.ncols();
    let mut omega = Mat::zeros((p, q));
    for i in 0..p {
        let zi = z.column(i).to_vec();
        for j in 0..q {
            let zj = zhat.column(j).to_vec();
            omega[(i, j)] = pearson(&zi, &zj);
        }
    }
    Ok(omega)
}

/// Mean correlation coefficient of a correlation matrix: the assignment-
/// maximized mean of absolute correlations, in `[0, 1]`. The optimum over
/// permutations is found with the Hungarian algorithm on the negated
/// absolute correlations.
pub fn mcc(omega: &Mat) -> Result<f64> {
    let p = omega.nrows();
    if p != omega.ncols() {
        return Err(Error::Dim(format!(
            "MCC needs a square correlation matrix, got {}x{}",
            p,
            omega.ncols()
        )));
    }
    let cost = omega.mapv(|v| -v.abs());
    let asn = solve_lsap(&cost)?;
    let total: f64 = (0..p).map(|i| omega[(i, asn[i])].abs()).sum();
    Ok(total / p as f64)
}

/// MCC between true and estimated component matrices.
pub fn mcc_of(z: &Mat, zhat: &Mat) -> Result<f64> {
    mcc(&corr_matrix(z, zhat)?)
}

/// Mean squared error.
pub fn mse(x: &[f64], xhat: &[f64]) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::Dim("mse inputs differ in length".into()));
    }
    let n = x.len() as f64;
    Ok(x.iter().zip(xhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n)
}

/// Mean absolute error.
pub fn mae(x: &[f64], xhat: &[f64]) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::Dim("mae inputs differ in length".into()));
    }
    let n = x.len() as f64;
    Ok(x.iter().zip(xhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / n)
}

fn check_sds(train_sds: &Array1<f64>, s: usize) -> Result<()> {
    if train_sds.len() != s {
        return Err(Error::Dim(format!(
            "need one training sd per variable: {} vs {s}",
            train_sds.len()
        )));
    }
    if train_sds.iter().any(|&v| v <= 0.0) {
        return Err(Error::Config("training sds must be strictly positive".into()));
    }
    Ok(())
}

/// Weighted MSE: mean over variables of per-variable MSE divided by the
/// training variance of that variable.
pub fn wmse(x: &Mat, xhat: &Mat, train_sds: &Array1<f64>) -> Result<f64> {
    if x.dim() != xhat.dim() {
        return Err(Error::Dim("wmse matrices differ in shape".into()));
    }
    let s = x.ncols();
    check_sds(train_sds, s)?;
    let mut total = 0.0;
    for j in 0..s {
        let m = mse(&x.column(j).to_vec(), &xhat.column(j).to_vec())?;
        total += m / (train_sds[j] * train_sds[j]);
    }
    Ok(total / s as f64)
}

/// Weighted MAE: mean over variables of per-variable MAE divided by the
/// training sd of that variable.
pub fn wmae(x: &Mat, xhat: &Mat, train_sds: &Array1<f64>) -> Result<f64> {
    if x.dim() != xhat.dim() {
        return Err(Error::Dim("wmae matrices differ in shape".into()));
    }
    let s = x.ncols();
    check_sds(train_sds, s)?;
    let mut total = 0.0;
    for j in 0..s {
        let m = mae(&x.column(j).to_vec(), &xhat.column(j).to_vec())?;
        total += m / train_sds[j];
    }
    Ok(total / s as f64)
}

/// Column standard deviations (denominator `n`), as used for wMSE weights.
pub fn column_sds(x: &Mat) -> Array1<f64> {
    let n = x.nrows() as f64;
    Array1::from_iter(x.columns().into_iter().map(|c| {
        let mean = c.sum() / n;
        (c.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
    }))
}
