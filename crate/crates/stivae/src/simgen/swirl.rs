//! Swirl coordinate deformation.
//!
//! Rotates coordinates around a center point by an angle that decays with
//! distance from the center, producing spatially varying dependence when the
//! deformed coordinates are used as latent coordinates. The two component
//! formulas are implemented exactly as displayed in the source recipe
//! (note the sign on the second component's cosine term).

use crate::error::{Error, Result};
use crate::nn::Mat;

/// Deformation center, decay scale, and rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwirlParams {
    pub center: [f64; 2],
    pub b_swirl: f64,
    pub eta: f64,
}

impl SwirlParams {
    pub fn new(center: [f64; 2], b_swirl: f64, eta: f64) -> Result<SwirlParams> {
        if !(b_swirl > 0.0) {
            return Err(Error::Config(format!("b_swirl must be positive, got {b_swirl}")));
        }
        Ok(SwirlParams { center, b_swirl, eta })
    }
}

/// Apply the swirl deformation to `n x 2` coordinates.
pub fn swirl(coords: &Mat, p: &SwirlParams) -> Mat {
    assert_eq!(coords.ncols(), 2, "swirl deformation is two-dimensional");
    let mut out = Mat::zeros(coords.raw_dim());
    for i in 0..coords.nrows() {
        let dx = coords[(i, 0)] - p.center[0];
        let dy = coords[(i, 1)] - p.center[1];
        let h = (dx * dx + dy * dy).sqrt();
        let angle = p.eta * (-(h / p.b_swirl).powi(2)).exp();
        let (sin, cos) = angle.sin_cos();
        out[(i, 0)] = dx * cos - dy * sin + p.center[0];
        out[(i, 1)] = dx * sin - dy * cos + p.center[1];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn center_is_a_fixed_point() {
        let p = SwirlParams::new([0.4, 0.6], 0.5, 1.8 * std::f64::consts::PI).unwrap();
        let out = swirl(&array![[0.4, 0.6]], &p);
        assert_eq!(out, array![[0.4, 0.6]]);
    }

    #[test]
    fn zero_angle_reduces_to_the_formulas_at_eta_zero() {
        // with eta = 0: cos = 1, sin = 0, so s1 passes through and
        // s2 maps to 2*c2 - s2 per the displayed second formula
        let p = SwirlParams::new([0.5, 0.5], 0.7, 0.0).unwrap();
        let out = swirl(&array![[0.2, 0.9]], &p);
        assert!((out[(0, 0)] - 0.2).abs() < 1e-15);
        assert!((out[(0, 1)] - (2.0 * 0.5 - 0.9)).abs() < 1e-15);
    }

    #[test]
    fn far_from_center_the_rotation_vanishes() {
        let eta = 2.0 * std::f64::consts::PI;
        let p = SwirlParams::new([0.5, 0.5], 0.05, eta).unwrap();
        // h* = ~14 b_swirl: rotation magnitude is exp(-196) ~ 0
        let out = swirl(&array![[1.2, 0.5]], &p);
        assert!((out[(0, 0)] - 1.2).abs() < 1e-12);
        assert!((out[(0, 1)] - 0.5).abs() < 1e-12);
    }
}
