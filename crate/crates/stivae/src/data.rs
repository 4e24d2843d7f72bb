//! Observation container and dataset CSV I/O.
//!
//! Dataset files are plain CSV with a header of `s1..sD, t`, optional latent
//! columns `z1..zP`, and observed columns `x1..xS`. Floats are written with
//! Rust's shortest round-trip formatting, so replaying a command reproduces
//! files byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::aux::Locations;
use crate::error::{Error, Result};
use crate::nn::Mat;

/// A multivariate spatio-temporal field: one observation row per location.
#[derive(Debug, Clone)]
pub struct StField {
    pub loc: Locations,
    /// `n x S` observations.
    pub values: Mat,
}

impl StField {
    pub fn new(loc: Locations, values: Mat) -> Result<StField> {
        if loc.len() != values.nrows() {
            return Err(Error::Dim(format!(
                "{} locations but {} observation rows",
                loc.len(),
                values.nrows()
            )));
        }
        Ok(StField { loc, values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }
}

/// Parsed dataset: locations, optional latent truth, observations.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub loc: Locations,
    pub z: Option<Mat>,
    pub x: Mat,
}

/// Write a dataset CSV (`s1..sD, t, z1..zP, x1..xS`).
pub fn write_dataset(path: &Path, loc: &Locations, z: Option<&Mat>, x: &Mat) -> Result<()> {
    let n = loc.len();
    if x.nrows() != n || z.map(|m| m.nrows() != n).unwrap_or(false) {
        return Err(Error::Dim("row counts of locations, z, and x differ".into()));
    }
    let d = loc.coords.ncols();
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    let mut header: Vec<String> = (1..=d).map(|i| format!("s{i}")).collect();
    header.push("t".into());
    if let Some(zm) = z {
        header.extend((1..=zm.ncols()).map(|i| format!("z{i}")));
    }
    header.extend((1..=x.ncols()).map(|i| format!("x{i}")));
    writeln!(out, "{}", header.join(","))?;
    for i in 0..n {
        let mut fields: Vec<String> = (0..d).map(|j| format!("{}", loc.coords[(i, j)])).collect();
        fields.push(format!("{}", loc.times[i]));
        if let Some(zm) = z {
            fields.extend((0..zm.ncols()).map(|j| format!("{}", zm[(i, j)])));
        }
        fields.extend((0..x.ncols()).map(|j| format!("{}", x[(i, j)])));
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Read a dataset CSV produced by [`write_dataset`] (or following the same
/// header convention).
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let header = rdr
        .headers()
        .map_err(|e| Error::Data(format!("bad header: {e}")))?
        .clone();
    let names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    let s_cols: Vec<usize> = names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.starts_with('s') && n[1..].parse::<usize>().is_ok())
        .map(|(i, _)| i)
        .collect();
    let t_col = names
        .iter()
        .position(|n| n == "t")
        .ok_or_else(|| Error::Data("dataset is missing a `t` column".into()))?;
    let z_cols: Vec<usize> = names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.starts_with('z') && n[1..].parse::<usize>().is_ok())
        .map(|(i, _)| i)
        .collect();
    let x_cols: Vec<usize> = names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.starts_with('x') && n[1..].parse::<usize>().is_ok())
        .map(|(i, _)| i)
        .collect();
    if s_cols.is_empty() || x_cols.is_empty() {
        return Err(Error::Data(
            "dataset needs s1.. coordinate columns and x1.. observation columns".into(),
        ));
    }

    let mut coords = Vec::new();
    let mut times = Vec::new();
    let mut zs = Vec::new();
    let mut xs = Vec::new();
    let mut n = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Data(format!("bad csv record: {e}")))?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Data(format!("missing field {i}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Data(format!("bad number in row {n}: {e}")))
        };
        for &c in &s_cols {
            coords.push(get(c)?);
        }
        times.push(get(t_col)?);
        for &c in &z_cols {
            zs.push(get(c)?);
        }
        for &c in &x_cols {
            xs.push(get(c)?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Data("dataset has no rows".into()));
    }
    let coords = Array2::from_shape_vec((n, s_cols.len()), coords).unwrap();
    let times = Array1::from_vec(times);
    let x = Array2::from_shape_vec((n, x_cols.len()), xs).unwrap();
    let z = if z_cols.is_empty() {
        None
    } else {
        Some(Array2::from_shape_vec((n, z_cols.len()), zs).unwrap())
    };
    Ok(Dataset {
        loc: Locations::new(coords, times)?,
        z,
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let loc = Locations::new(array![[0.1, 0.2], [0.3, 0.4]], array![1.0, 2.0]).unwrap();
        let z = array![[0.5], [0.25]];
        let x = array![[1.0, -1.0], [2.0, 0.125]];
        write_dataset(&path, &loc, Some(&z), &x).unwrap();
        let ds = read_dataset(&path).unwrap();
        assert_eq!(ds.loc.coords, loc.coords);
        assert_eq!(ds.loc.times, loc.times);
        assert_eq!(ds.z.unwrap(), z);
        assert_eq!(ds.x, x);
    }

    #[test]
    fn missing_t_column_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "s1,s2,x1\n0,0,1\n").unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Data(_))));
    }
}
