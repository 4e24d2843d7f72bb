//! Auxiliary-variable construction from spatio-temporal locations.
//!
//! The latent prior of the identifiable VAE is conditioned on an auxiliary
//! vector `u(s, t)` derived from the observation's location. Three builders
//! are provided:
//!
//! - [`normalize_coords`]: min-max normalized coordinates, `m = D + 1`;
//! - [`segment_aux`]: one-hot segment indicators ([`SegmentationSpec`]);
//! - [`radial_aux`]: multi-resolution radial basis features
//!   ([`ResolutionSpec`]).
//!
//! Builders fit normalization constants / segment edges on the training
//! locations and reapply them bit-exactly to new locations.

mod radial;
mod seg;

pub use radial::{node_points, radial_aux, radial_rows, Kernel, NodePoints, ResolutionSpec};
pub use seg::{segment_aux, AxisSegments, SegMode, SegmentationSpec};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::nn::Mat;

/// Spatio-temporal locations: `n x D` spatial coordinates plus `n` times.
#[derive(Debug, Clone)]
pub struct Locations {
    pub coords: Mat,
    pub times: Array1<f64>,
}

impl Locations {
    pub fn new(coords: Mat, times: Array1<f64>) -> Result<Locations> {
        if coords.nrows() != times.len() {
            return Err(Error::Dim(format!(
                "{} coordinate rows but {} times",
                coords.nrows(),
                times.len()
            )));
        }
        if coords.nrows() == 0 {
            return Err(Error::Data("locations are empty".into()));
        }
        if coords.iter().any(|v| !v.is_finite()) || times.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("locations contain non-finite entries".into()));
        }
        Ok(Locations { coords, times })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spatial_dim(&self) -> usize {
        self.coords.ncols()
    }

    /// Select a subset of rows, preserving order.
    pub fn select(&self, rows: &[usize]) -> Locations {
        let coords = Mat::from_shape_fn((rows.len(), self.spatial_dim()), |(i, j)| {
            self.coords[(rows[i], j)]
        });
        let times = Array1::from_iter(rows.iter().map(|&r| self.times[r]));
        Locations { coords, times }
    }
}

/// Auxiliary-variable matrix: one row per location, named columns.
#[derive(Debug, Clone)]
pub struct AuxMatrix {
    pub values: Mat,
    pub names: Vec<String>,
    pub builder: String,
}

impl AuxMatrix {
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Write as CSV with the column names as header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", self.names.join(","))?;
        for row in self.values.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Read a CSV written by [`AuxMatrix::write_csv`].
    pub fn read_csv(path: &Path) -> Result<AuxMatrix> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Data(format!("bad header: {e}")))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut vals = Vec::new();
        let mut n = 0;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Data(format!("bad record: {e}")))?;
            for f in rec.iter() {
                vals.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Data(format!("bad number: {e}")))?,
                );
            }
            n += 1;
        }
        let values = Array2::from_shape_vec((n, names.len()), vals)
            .map_err(|e| Error::Data(format!("ragged aux csv: {e}")))?;
        Ok(AuxMatrix {
            values,
            names,
            builder: "imported".into(),
        })
    }
}

/// Per-axis min-max normalization constants over `(s_1, ..., s_D, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Normalizer {
    /// Record per-axis min/max. Errors on a constant axis.
    pub fn fit(loc: &Locations) -> Result<Normalizer> {
        let d = loc.spatial_dim();
        let mut mins = Vec::with_capacity(d + 1);
        let mut maxs = Vec::with_capacity(d + 1);
        for j in 0..d {
            let col = loc.coords.column(j);
            let mn = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let mx = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if mx <= mn {
                return Err(Error::Data(format!(
                    "spatial axis {} is degenerate (min == max == {mn})",
                    j + 1
                )));
            }
            mins.push(mn);
            maxs.push(mx);
        }
        let mn = loc.times.iter().cloned().fold(f64::INFINITY, f64::min);
        let mx = loc.times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if mx <= mn {
            return Err(Error::Data(format!(
                "time axis is degenerate (min == max == {mn})"
            )));
        }
        mins.push(mn);
        maxs.push(mx);
        Ok(Normalizer { mins, maxs })
    }

    pub fn n_axes(&self) -> usize {
        self.mins.len()
    }

    /// Map locations to `n x (D+1)` normalized coordinates (time last).
    pub fn transform(&self, loc: &Locations) -> Result<Mat> {
        let d = loc.spatial_dim();
        if d + 1 != self.n_axes() {
            return Err(Error::Dim(format!(
                "normalizer fitted for {} axes, locations have {}",
                self.n_axes(),
                d + 1
            )));
        }
        let n = loc.len();
        let mut out = Mat::zeros((n, d + 1));
        for i in 0..n {
            for j in 0..d {
                out[(i, j)] = (loc.coords[(i, j)] - self.mins[j]) / (self.maxs[j] - self.mins[j]);
            }
            out[(i, d)] = (loc.times[i] - self.mins[d]) / (self.maxs[d] - self.mins[d]);
        }
        Ok(out)
    }
}

/// Min-max normalized coordinates as auxiliary variables (`m = D + 1`).
/// Returns the matrix and the fitted constants for reuse on new locations.
pub fn normalize_coords(loc: &Locations) -> Result<(AuxMatrix, Normalizer)> {
    let norm = Normalizer::fit(loc)?;
    let values = norm.transform(loc)?;
    let d = loc.spatial_dim();
    let mut names: Vec<String> = (1..=d).map(|i| format!("s{i}_norm")).collect();
    names.push("t_norm".into());
    Ok((
        AuxMatrix {
            values,
            names,
            builder: "coord".into(),
        },
        norm,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn loc3() -> Locations {
        Locations::new(
            array![[0.0, 2.0], [1.0, 4.0], [0.5, 3.0]],
            array![10.0, 20.0, 15.0],
        )
        .unwrap()
    }

    #[test]
    fn midpoint_time_maps_to_half() {
        let (aux, _) = normalize_coords(&loc3()).unwrap();
        assert_eq!(aux.values[(2, 2)], 0.5);
        assert_eq!(aux.dim(), 3);
    }

    #[test]
    fn minimum_location_maps_to_zero_row() {
        let (aux, _) = normalize_coords(&loc3()).unwrap();
        assert_eq!(aux.values.row(0).to_vec(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_axis_is_rejected() {
        let loc = Locations::new(array![[1.0, 2.0], [1.0, 3.0]], array![0.0, 1.0]).unwrap();
        assert!(matches!(normalize_coords(&loc), Err(Error::Data(_))));
    }

    #[test]
    fn stored_constants_reproduce_training_aux_bit_exactly() {
        let loc = loc3();
        let (aux, norm) = normalize_coords(&loc).unwrap();
        let again = norm.transform(&loc).unwrap();
        assert_eq!(aux.values, again);
    }

    #[test]
    fn aux_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("aux.csv");
        let (aux, _) = normalize_coords(&loc3()).unwrap();
        aux.write_csv(&path).unwrap();
        let back = AuxMatrix::read_csv(&path).unwrap();
        assert_eq!(back.values, aux.values);
        assert_eq!(back.names, aux.names);
    }
}
