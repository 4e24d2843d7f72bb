//! Multi-resolution radial basis auxiliary variables.
//!
//! Locations (pre-normalized to `[0, 1]` per axis) are encoded by kernel
//! values against evenly spaced node grids at several resolution levels. A
//! spatial level `H` places `H` points per axis at
//! `{1/(H+2), 1/(H+2) + 1/H, ...}` (so `H^D` joint nodes) with scale
//! `zeta_H = 1/(2.5 H)`; a temporal level `G` places `G` one-dimensional
//! points the same way with scale `zeta_G = (1/G)/sqrt(2)`. Low levels
//! capture large-scale structure, high levels finer detail.
//!
//! Extra one-dimensional axes (e.g. elevation) are treated exactly like
//! time, with their own level lists.

use crate::aux::{AuxMatrix, Locations};
use crate::error::{Error, Result};
use crate::nn::Mat;

/// Radial kernel of scaled distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `exp(-d^2)`
    Gaussian,
    /// `(1-d)^6 (35 d^2 + 18 d + 3) / 3` on `[0, 1]`, zero beyond.
    Wendland,
}

impl Kernel {
    #[inline]
    pub fn eval(self, d: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-d * d).exp(),
            Kernel::Wendland => {
                if d >= 1.0 {
                    0.0
                } else {
                    let om = 1.0 - d;
                    om.powi(6) * (35.0 * d * d + 18.0 * d + 3.0) / 3.0
                }
            }
        }
    }

    pub fn parse(tag: &str) -> Option<Kernel> {
        match tag {
            "gaussian" => Some(Kernel::Gaussian),
            "wendland" => Some(Kernel::Wendland),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Kernel::Gaussian => "gaussian",
            Kernel::Wendland => "wendland",
        }
    }
}

/// Resolution levels for the radial builder.
///
/// `extra_levels` claims the trailing spatial coordinate columns as
/// independent 1-D axes: with `coords` of width `D` and `e` extra axes, the
/// first `D - e` columns form the joint spatial grid and the last `e`
/// columns get 1-D bases.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionSpec {
    pub spatial_levels: Vec<usize>,
    pub temporal_levels: Vec<usize>,
    pub extra_levels: Vec<Vec<usize>>,
    pub kernel: Kernel,
}

impl ResolutionSpec {
    /// Standard configuration: `H = (2, 9)`, `G = (9, 17, 37)`, Wendland.
    pub fn standard() -> ResolutionSpec {
        ResolutionSpec {
            spatial_levels: vec![2, 9],
            temporal_levels: vec![9, 17, 37],
            extra_levels: Vec::new(),
            kernel: Kernel::Wendland,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .spatial_levels
            .iter()
            .chain(self.temporal_levels.iter())
            .chain(self.extra_levels.iter().flatten());
        if self.spatial_levels.is_empty() || self.temporal_levels.is_empty() {
            return Err(Error::Config(
                "resolution spec needs at least one spatial and one temporal level".into(),
            ));
        }
        if all.clone().any(|&l| l == 0) {
            return Err(Error::Config("resolution levels must be >= 1".into()));
        }
        Ok(())
    }

    /// Auxiliary dimension produced for `joint_dim` joint spatial axes.
    pub fn dim(&self, joint_dim: usize) -> usize {
        let sp: usize = self
            .spatial_levels
            .iter()
            .map(|&h| h.pow(joint_dim as u32))
            .sum();
        let t: usize = self.temporal_levels.iter().sum();
        let e: usize = self.extra_levels.iter().flatten().sum();
        sp + t + e
    }
}

/// The 1-D node points of a level: `{1/(L+2) + k/L : k = 0..L-1}`.
pub fn axis_nodes(level: usize) -> Vec<f64> {
    let l = level as f64;
    (0..level).map(|k| 1.0 / (l + 2.0) + k as f64 / l).collect()
}

/// Scale for a spatial level: `1 / (2.5 H)`.
pub fn spatial_scale(level: usize) -> f64 {
    1.0 / (2.5 * level as f64)
}

/// Scale for a temporal (or extra-axis) level: node spacing over `sqrt(2)`.
pub fn temporal_scale(level: usize) -> f64 {
    (1.0 / level as f64) / 2.0_f64.sqrt()
}

/// One spatial resolution level: the joint grid and its scale.
#[derive(Debug, Clone)]
pub struct SpatialLevel {
    pub level: usize,
    pub scale: f64,
    /// `H^D` nodes, each of dimension `D`, last axis fastest.
    pub nodes: Vec<Vec<f64>>,
}

/// One 1-D resolution level (time or an extra axis).
#[derive(Debug, Clone)]
pub struct AxisLevel {
    pub level: usize,
    pub scale: f64,
    pub nodes: Vec<f64>,
}

/// Node points for all levels of a spec.
#[derive(Debug, Clone)]
pub struct NodePoints {
    pub spatial: Vec<SpatialLevel>,
    pub temporal: Vec<AxisLevel>,
    pub extra: Vec<Vec<AxisLevel>>,
}

fn grid(points: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut nodes: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(nodes.len() * points.len());
        for base in &nodes {
            for &p in points {
                let mut node = base.clone();
                node.push(p);
                next.push(node);
            }
        }
        nodes = next;
    }
    nodes
}

/// Enumerate node points and scales for `joint_dim` joint spatial axes.
pub fn node_points(spec: &ResolutionSpec, joint_dim: usize) -> Result<NodePoints> {
    spec.validate()?;
    let spatial = spec
        .spatial_levels
        .iter()
        .map(|&h| SpatialLevel {
            level: h,
            scale: spatial_scale(h),
            nodes: grid(&axis_nodes(h), joint_dim),
        })
        .collect();
    let axis = |levels: &[usize]| -> Vec<AxisLevel> {
        levels
            .iter()
            .map(|&g| AxisLevel {
                level: g,
                scale: temporal_scale(g),
                nodes: axis_nodes(g),
            })
            .collect()
    };
    Ok(NodePoints {
        spatial,
        temporal: axis(&spec.temporal_levels),
        extra: spec.extra_levels.iter().map(|l| axis(l)).collect(),
    })
}

const NORM_TOL: f64 = 0.05;

fn check_normalized(v: f64, what: &str) -> Result<()> {
    if !(-NORM_TOL..=1.0 + NORM_TOL).contains(&v) {
        return Err(Error::Data(format!(
            "{what} = {v} is outside [-0.05, 1.05]; radial bases expect min-max normalized input"
        )));
    }
    Ok(())
}

/// Fill one auxiliary row for a normalized location.
fn fill_row(
    row: &mut [f64],
    coords: &[f64],
    time: f64,
    joint_dim: usize,
    nodes: &NodePoints,
    kernel: Kernel,
) -> Result<()> {
    for (j, &c) in coords.iter().enumerate() {
        check_normalized(c, &format!("coordinate {}", j + 1))?;
    }
    check_normalized(time, "time")?;

    let mut k = 0usize;
    for lvl in &nodes.spatial {
        for node in &lvl.nodes {
            let mut d2 = 0.0;
            for j in 0..joint_dim {
                let diff = coords[j] - node[j];
                d2 += diff * diff;
            }
            row[k] = kernel.eval(d2.sqrt() / lvl.scale);
            k += 1;
        }
    }
    for lvl in &nodes.temporal {
        for &node in &lvl.nodes {
            row[k] = kernel.eval((time - node).abs() / lvl.scale);
            k += 1;
        }
    }
    for (e, levels) in nodes.extra.iter().enumerate() {
        let v = coords[joint_dim + e];
        for lvl in levels {
            for &node in &lvl.nodes {
                row[k] = kernel.eval((v - node).abs() / lvl.scale);
                k += 1;
            }
        }
    }
    Ok(())
}

fn column_names(spec: &ResolutionSpec, nodes: &NodePoints) -> Vec<String> {
    let mut names = Vec::new();
    for lvl in &nodes.spatial {
        names.extend((0..lvl.nodes.len()).map(|i| format!("rb_sp_h{}_{i}", lvl.level)));
    }
    for lvl in &nodes.temporal {
        names.extend((0..lvl.nodes.len()).map(|i| format!("rb_t_g{}_{i}", lvl.level)));
    }
    for (e, levels) in nodes.extra.iter().enumerate() {
        for lvl in levels {
            names.extend((0..lvl.nodes.len()).map(|i| format!("rb_e{}_g{}_{i}", e + 1, lvl.level)));
        }
    }
    debug_assert_eq!(names.len(), spec.dim(nodes.spatial[0].nodes[0].len()));
    names
}

/// Radial basis auxiliary matrix for pre-normalized locations.
pub fn radial_aux(loc: &Locations, spec: &ResolutionSpec) -> Result<AuxMatrix> {
    spec.validate()?;
    let d_total = loc.spatial_dim();
    if spec.extra_levels.len() >= d_total {
        return Err(Error::Config(format!(
            "{} extra axes leave no joint spatial axis (coords have {} columns)",
            spec.extra_levels.len(),
            d_total
        )));
    }
    let joint_dim = d_total - spec.extra_levels.len();
    let nodes = node_points(spec, joint_dim)?;
    let m = spec.dim(joint_dim);
    let n = loc.len();
    let mut values = Mat::zeros((n, m));
    let mut coord_buf = vec![0.0; d_total];
    for i in 0..n {
        for j in 0..d_total {
            coord_buf[j] = loc.coords[(i, j)];
        }
        fill_row(
            values.row_mut(i).as_slice_mut().unwrap(),
            &coord_buf,
            loc.times[i],
            joint_dim,
            &nodes,
            spec.kernel,
        )?;
    }
    Ok(AuxMatrix {
        values,
        names: column_names(spec, &nodes),
        builder: format!("radial-{}", spec.kernel.tag()),
    })
}

/// Batch-wise construction: auxiliary rows for the subset `rows` of `loc`,
/// bit-identical to the corresponding rows of [`radial_aux`].
pub fn radial_rows(loc: &Locations, spec: &ResolutionSpec, rows: &[usize]) -> Result<Mat> {
    spec.validate()?;
    let d_total = loc.spatial_dim();
    let joint_dim = d_total - spec.extra_levels.len();
    let nodes = node_points(spec, joint_dim)?;
    let m = spec.dim(joint_dim);
    let mut values = Mat::zeros((rows.len(), m));
    let mut coord_buf = vec![0.0; d_total];
    for (out_i, &i) in rows.iter().enumerate() {
        for j in 0..d_total {
            coord_buf[j] = loc.coords[(i, j)];
        }
        fill_row(
            values.row_mut(out_i).as_slice_mut().unwrap(),
            &coord_buf,
            loc.times[i],
            joint_dim,
            &nodes,
            spec.kernel,
        )?;
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};

    #[test]
    fn two_level_spatial_nodes_are_quarter_and_three_quarters() {
        assert_eq!(axis_nodes(2), vec![0.25, 0.75]);
        assert_eq!(spatial_scale(2), 0.2);
    }

    #[test]
    fn five_level_temporal_nodes_start_at_one_seventh_with_fifth_spacing() {
        let nodes = axis_nodes(5);
        assert_eq!(nodes.len(), 5);
        assert!((nodes[0] - 1.0 / 7.0).abs() < 1e-15);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - 0.2).abs() < 1e-15);
        }
        assert!((temporal_scale(5) - 0.2 / 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn standard_spec_dimension_is_148_for_two_joint_axes() {
        let spec = ResolutionSpec {
            spatial_levels: vec![2, 9],
            temporal_levels: vec![9, 17, 37],
            extra_levels: vec![],
            kernel: Kernel::Wendland,
        };
        assert_eq!(spec.dim(2), (4 + 81) + (9 + 17 + 37));
    }

    #[test]
    fn location_at_a_node_scores_one_for_both_kernels() {
        for kernel in [Kernel::Gaussian, Kernel::Wendland] {
            let spec = ResolutionSpec {
                spatial_levels: vec![2],
                temporal_levels: vec![5],
                extra_levels: vec![],
                kernel,
            };
            let loc = Locations::new(array![[0.25, 0.75]], Array1::from_vec(vec![1.0 / 7.0])).unwrap();
            let aux = radial_aux(&loc, &spec).unwrap();
            // node (0.25, 0.75) is the second of four grid nodes
            assert_eq!(aux.values[(0, 1)], 1.0);
            // first temporal node matches exactly
            assert_eq!(aux.values[(0, 4)], 1.0);
        }
    }

    #[test]
    fn kernel_values_at_unit_scaled_distance() {
        assert_eq!(Kernel::Wendland.eval(1.0), 0.0);
        assert!((Kernel::Gaussian.eval(1.0) - (-1.0_f64).exp()).abs() < 1e-15);
        assert_eq!(Kernel::Wendland.eval(0.0), 1.0);
        assert_eq!(Kernel::Gaussian.eval(0.0), 1.0);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let spec = ResolutionSpec::standard();
        let loc = Locations::new(array![[3.0, 0.2]], Array1::from_vec(vec![0.5])).unwrap();
        assert!(matches!(radial_aux(&loc, &spec), Err(Error::Data(_))));
    }

    #[test]
    fn batch_rows_agree_bit_exactly_with_full_matrix() {
        let n = 37;
        let coords = Array2::from_shape_fn((n, 2), |(i, j)| {
            ((i * 13 + j * 7) % 101) as f64 / 100.0
        });
        let times = Array1::from_shape_fn(n, |i| (i % 19) as f64 / 18.0);
        let loc = Locations::new(coords, times).unwrap();
        let spec = ResolutionSpec::standard();
        let full = radial_aux(&loc, &spec).unwrap();
        let rows: Vec<usize> = (0..n).collect();
        for chunk in rows.chunks(8) {
            let batch = radial_rows(&loc, &spec, chunk).unwrap();
            for (bi, &i) in chunk.iter().enumerate() {
                assert_eq!(batch.row(bi), full.values.row(i));
            }
        }
    }

    #[test]
    fn values_lie_in_unit_interval_and_decrease_with_distance() {
        let spec = ResolutionSpec {
            spatial_levels: vec![2],
            temporal_levels: vec![5],
            extra_levels: vec![],
            kernel: Kernel::Wendland,
        };
        // walk away from node (0.25, 0.25) along s1
        let mut prev = f64::INFINITY;
        for step in 0..20 {
            let s1 = 0.25 + step as f64 * 0.035;
            let loc = Locations::new(array![[s1, 0.25]], Array1::from_vec(vec![0.5])).unwrap();
            let aux = radial_aux(&loc, &spec).unwrap();
            let v = aux.values[(0, 0)];
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn extra_axis_gets_its_own_one_dimensional_bases() {
        let spec = ResolutionSpec {
            spatial_levels: vec![2],
            temporal_levels: vec![5],
            extra_levels: vec![vec![3]],
            kernel: Kernel::Gaussian,
        };
        // coords: (s1, s2, elevation); the first two stay a joint 2-D grid
        let loc = Locations::new(array![[0.5, 0.4, 0.9]], Array1::from_vec(vec![0.5])).unwrap();
        let aux = radial_aux(&loc, &spec).unwrap();
        assert_eq!(aux.dim(), 4 + 5 + 3);
        assert!(aux.names.iter().any(|n| n.starts_with("rb_e1_")));
    }
}
