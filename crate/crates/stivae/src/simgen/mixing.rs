//! Nonlinear mixing functions built from random MLP layers.
//!
//! `f_L(z)` applies `L` bias-free layers: the first matrix is `S x P`, the
//! rest `S x S`. Entries are drawn standard normal, then each matrix is
//! row-normalized followed by column-normalized (one pass each, L2) so that
//! no component vanishes in the mixing; exact simultaneous unit rows and
//! columns is generally infeasible, so this is approximate by construction.
//! Inner layers use ELU, the last layer is linear, and `L = 1` is a pure
//! linear mixing.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::nn::activation::Activation;
use crate::nn::Mat;
use crate::seed;

/// A fixed mixing map from `P` latent to `S` observed dimensions.
#[derive(Debug, Clone)]
pub struct MixingFunction {
    /// `matrices[0]` is `S x P`, the rest are `S x S`.
    pub matrices: Vec<Mat>,
}

impl MixingFunction {
    pub fn n_layers(&self) -> usize {
        self.matrices.len()
    }

    pub fn latent_dim(&self) -> usize {
        self.matrices[0].ncols()
    }

    pub fn observed_dim(&self) -> usize {
        self.matrices[0].nrows()
    }
}

fn normalize_rows_then_columns(m: &mut Mat) {
    for mut row in m.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    for mut col in m.columns_mut() {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|v| v / norm);
        }
    }
}

/// Draw a mixing function with `l` layers from `P` to `S` dimensions.
pub fn gen_mixing(l: usize, p: usize, s: usize, seed_value: u64) -> Result<MixingFunction> {
    if l == 0 {
        return Err(Error::Config("mixing needs at least one layer".into()));
    }
    if s < p {
        return Err(Error::Config(format!(
            "observed dimension S={s} must be >= latent dimension P={p}"
        )));
    }
    let mut rng = seed::rng(seed_value, "mixing");
    let mut matrices = Vec::with_capacity(l);
    for layer in 0..l {
        let cols = if layer == 0 { p } else { s };
        let mut m = Mat::from_shape_fn((s, cols), |_| rng.sample::<f64, _>(StandardNormal));
        normalize_rows_then_columns(&mut m);
        matrices.push(m);
    }
    Ok(MixingFunction { matrices })
}

/// Apply the mixing to `n x P` latent rows, producing `n x S` observations.
pub fn apply_mixing(f: &MixingFunction, z: &Mat) -> Result<Mat> {
    if z.ncols() != f.latent_dim() {
        return Err(Error::Dim(format!(
            "latent rows have {} columns, mixing expects {}",
            z.ncols(),
            f.latent_dim()
        )));
    }
    let last = f.matrices.len() - 1;
    let mut cur = z.to_owned();
    for (i, b) in f.matrices.iter().enumerate() {
        let mut h = cur.dot(&b.t());
        if i != last {
            h.mapv_inplace(|v| Activation::Elu.apply(v));
        }
        cur = h;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn single_layer_is_exactly_linear() {
        let f = gen_mixing(1, 3, 5, 7).unwrap();
        let z = array![[1.0, -2.0, 0.5], [0.0, 1.0, 3.0]];
        let x = apply_mixing(&f, &z).unwrap();
        let linear = z.dot(&f.matrices[0].t());
        assert_eq!(x, linear);
    }

    #[test]
    fn zero_maps_to_zero() {
        for l in [1, 3, 5] {
            let f = gen_mixing(l, 4, 6, 11).unwrap();
            let x = apply_mixing(&f, &Mat::zeros((2, 4))).unwrap();
            assert!(x.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn empirically_injective_on_random_pairs() {
        let f = gen_mixing(3, 3, 5, 13).unwrap();
        let mut rng = crate::seed::rng(5, "inj");
        for _ in 0..10_000 {
            let a = Mat::from_shape_fn((1, 3), |_| rng.gen_range(-3.0..3.0));
            let b = Mat::from_shape_fn((1, 3), |_| rng.gen_range(-3.0..3.0));
            if a == b {
                continue;
            }
            let fa = apply_mixing(&f, &a).unwrap();
            let fb = apply_mixing(&f, &b).unwrap();
            let dist: f64 = (&fa - &fb).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(dist > 1e-9, "collision: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn shapes_follow_the_recipe() {
        let f = gen_mixing(3, 5, 8, 1).unwrap();
        assert_eq!(f.matrices[0].dim(), (8, 5));
        assert_eq!(f.matrices[1].dim(), (8, 8));
        assert_eq!(f.matrices[2].dim(), (8, 8));
    }

    #[test]
    fn orthonormal_columns_preserve_inner_products_for_linear_mixing() {
        // Gram-Schmidt a random 5x3 to orthonormal columns
        let mut rng = crate::seed::rng(17, "gs");
        let mut b = Mat::from_shape_fn((5, 3), |_| rng.sample::<f64, _>(StandardNormal));
        for j in 0..3 {
            for k in 0..j {
                let proj = b.column(j).dot(&b.column(k));
                let col_k = b.column(k).to_owned();
                let mut col_j = b.column_mut(j);
                col_j.zip_mut_with(&col_k, |x, &y| *x -= proj * y);
            }
            let norm = b.column(j).dot(&b.column(j)).sqrt();
            b.column_mut(j).mapv_inplace(|v| v / norm);
        }
        let f = MixingFunction { matrices: vec![b] };
        let z = array![[1.0, 0.5, -2.0], [0.3, 0.0, 1.0], [2.0, -1.0, 0.25]];
        let x = apply_mixing(&f, &z).unwrap();
        let gz = z.dot(&z.t());
        let gx = x.dot(&x.t());
        for (a, b) in gz.iter().zip(gx.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_mixing(3, 5, 8, 42).unwrap();
        let b = gen_mixing(3, 5, 8, 42).unwrap();
        for (ma, mb) in a.matrices.iter().zip(&b.matrices) {
            assert_eq!(ma, mb);
        }
    }
}
