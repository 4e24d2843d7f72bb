//! Segmentation-based auxiliary variables.
//!
//! The domain is partitioned into non-intersecting segments and each
//! observation is encoded by segment indicators. Three modes trade dimension
//! against joint structure:
//!
//! - [`SegMode::S1`]: every axis segmented separately; `m` is the sum of the
//!   per-axis segment counts and every row sums to `D + 1`.
//! - [`SegMode::S2`]: joint spatial cells plus separate temporal segments;
//!   `m = m_S + m_T`, row sum 2.
//! - [`SegMode::S3`]: joint spatio-temporal cells; `m` is the product of all
//!   per-axis counts, row sum 1.
//!
//! Segments are left-closed/right-open; values at the global maximum fall
//! into the last segment.

use crate::aux::{AuxMatrix, Locations};
use crate::error::{Error, Result};
use crate::nn::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegMode {
    S1,
    S2,
    S3,
}

impl SegMode {
    pub fn parse(tag: &str) -> Option<SegMode> {
        match tag {
            "s1" => Some(SegMode::S1),
            "s2" => Some(SegMode::S2),
            "s3" => Some(SegMode::S3),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            SegMode::S1 => "s1",
            SegMode::S2 => "s2",
            SegMode::S3 => "s3",
        }
    }
}

/// Per-axis segmentation: an equal-width count resolved against the data
/// range, or explicit strictly increasing edges covering it.
#[derive(Debug, Clone, PartialEq)]
pub enum AxisSegments {
    Count(usize),
    Edges(Vec<f64>),
}

/// Segmentation specification: one entry per spatial axis plus time.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationSpec {
    pub mode: SegMode,
    pub spatial: Vec<AxisSegments>,
    pub time: AxisSegments,
}

/// Resolved edges for one axis.
#[derive(Debug, Clone)]
struct AxisEdges {
    edges: Vec<f64>,
}

impl AxisEdges {
    fn resolve(seg: &AxisSegments, min: f64, max: f64, axis: &str) -> Result<AxisEdges> {
        let edges = match seg {
            AxisSegments::Count(c) => {
                if *c == 0 {
                    return Err(Error::Config(format!("{axis}: segment count must be >= 1")));
                }
                if max <= min {
                    return Err(Error::Data(format!("{axis}: degenerate range [{min}, {max}]")));
                }
                let w = (max - min) / *c as f64;
                (0..=*c).map(|i| min + w * i as f64).collect()
            }
            AxisSegments::Edges(e) => {
                if e.len() < 2 {
                    return Err(Error::Config(format!("{axis}: need at least 2 edges")));
                }
                if e.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config(format!("{axis}: edges must strictly increase")));
                }
                if e[0] > min || *e.last().unwrap() < max {
                    return Err(Error::Data(format!(
                        "{axis}: edges [{}, {}] do not cover data range [{min}, {max}]",
                        e[0],
                        e.last().unwrap()
                    )));
                }
                e.clone()
            }
        };
        Ok(AxisEdges { edges })
    }

    fn n(&self) -> usize {
        self.edges.len() - 1
    }

    /// Left-closed/right-open bins; the last segment is right-closed.
    fn index_of(&self, v: f64, axis: &str) -> Result<usize> {
        let first = self.edges[0];
        let last = *self.edges.last().unwrap();
        if v < first || v > last {
            return Err(Error::Data(format!(
                "{axis}: value {v} is outside the segmented range [{first}, {last}]"
            )));
        }
        if v == last {
            return Ok(self.n() - 1);
        }
        // edges are sorted; binary search for the containing bin
        let mut lo = 0usize;
        let mut hi = self.n();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if v >= self.edges[mid] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// Build one-hot segment indicators for `loc` under `spec`.
pub fn segment_aux(loc: &Locations, spec: &SegmentationSpec) -> Result<AuxMatrix> {
    let d = loc.spatial_dim();
    if spec.spatial.len() != d {
        return Err(Error::Config(format!(
            "segmentation has {} spatial axes, locations have {d}",
            spec.spatial.len()
        )));
    }

    let mut axes = Vec::with_capacity(d + 1);
    for j in 0..d {
        let col = loc.coords.column(j);
        let mn = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let mx = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        axes.push(AxisEdges::resolve(&spec.spatial[j], mn, mx, &format!("s{}", j + 1))?);
    }
    let tmn = loc.times.iter().cloned().fold(f64::INFINITY, f64::min);
    let tmx = loc.times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    axes.push(AxisEdges::resolve(&spec.time, tmn, tmx, "t")?);

    build_rows(loc, spec.mode, &axes)
}

fn build_rows(loc: &Locations, mode: SegMode, axes: &[AxisEdges]) -> Result<AuxMatrix> {
    let d = axes.len() - 1;
    let n = loc.len();
    let counts: Vec<usize> = axes.iter().map(AxisEdges::n).collect();
    let m_spatial_joint: usize = counts[..d].iter().product();
    let m_t = counts[d];

    let (m, names) = match mode {
        SegMode::S1 => {
            let m = counts.iter().sum();
            let mut names = Vec::with_capacity(m);
            for (j, &c) in counts.iter().enumerate() {
                let axis = if j < d { format!("s{}", j + 1) } else { "t".into() };
                names.extend((0..c).map(|k| format!("seg_{axis}_{k}")));
            }
            (m, names)
        }
        SegMode::S2 => {
            let m = m_spatial_joint + m_t;
            let mut names: Vec<String> = (0..m_spatial_joint).map(|k| format!("seg_sp_{k}")).collect();
            names.extend((0..m_t).map(|k| format!("seg_t_{k}")));
            (m, names)
        }
        SegMode::S3 => {
            let m = m_spatial_joint * m_t;
            (m, (0..m).map(|k| format!("seg_st_{k}")).collect())
        }
    };

    let mut values = Mat::zeros((n, m));
    for i in 0..n {
        let mut idx = Vec::with_capacity(d + 1);
        for (j, ax) in axes.iter().enumerate() {
            let (v, axis) = if j < d {
                (loc.coords[(i, j)], format!("s{}", j + 1))
            } else {
                (loc.times[i], "t".into())
            };
            idx.push(ax.index_of(v, &axis)?);
        }
        match mode {
            SegMode::S1 => {
                let mut off = 0;
                for (j, &c) in counts.iter().enumerate() {
                    values[(i, off + idx[j])] = 1.0;
                    off += c;
                }
            }
            SegMode::S2 => {
                let mut cell = 0usize;
                for j in 0..d {
                    cell = cell * counts[j] + idx[j];
                }
                values[(i, cell)] = 1.0;
                values[(i, m_spatial_joint + idx[d])] = 1.0;
            }
            SegMode::S3 => {
                let mut cell = 0usize;
                for j in 0..=d {
                    cell = cell * counts[j] + idx[j];
                }
                values[(i, cell)] = 1.0;
            }
        }
    }

    Ok(AuxMatrix {
        values,
        names,
        builder: format!("segment-{}", mode.tag()),
    })
}
