//! Point clouds, `l^p` norms, and brute-force nearest-neighbor queries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `l^p` norm with `p >= 1`, or the max norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Norm {
    Lp(f64),
    Max,
}

impl Default for Norm {
    fn default() -> Self {
        Norm::Lp(2.0)
    }
}

impl Norm {
    pub fn validate(self) -> Result<Self> {
        match self {
            Norm::Lp(p) if !(p >= 1.0) || !p.is_finite() => {
                Err(Error::InvalidParameter(format!("norm exponent {p} must be >= 1")))
            }
            _ => Ok(self),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Norm::Max => diffs.fold(0.0, f64::max),
            Norm::Lp(2.0) => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::Lp(1.0) => diffs.sum(),
            Norm::Lp(p) => diffs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// Parses `2`, `1.5`, or `inf`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(Norm::Max),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad norm `{s}`")))
                .and_then(|p| Norm::Lp(p).validate()),
        }
    }
}

/// How intrinsic distances are measured on a stored chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartGeometry {
    /// Euclidean distance between chart coordinates.
    Euclidean,
    /// Chart is `(radius, angle)`; distance is arc length on the circle.
    Circle,
    /// Chart is `(t, height)` on the spiral `(t cos t, t sin t)`; distance is
    /// Euclidean in (arc length, height).
    Spiral,
}

/// Arc length of the spiral `(t cos t, t sin t)` from 0 to `t`.
pub fn spiral_arc_length(t: f64) -> f64 {
    0.5 * (t * (1.0 + t * t).sqrt() + t.asinh())
}

/// Ground-truth intrinsic structure of a sampled manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intrinsic {
    pub geometry: ChartGeometry,
    /// Connected-component id of the manifold piece each point lies on.
    pub component: Vec<usize>,
    /// Per-point chart coordinates.
    pub chart: Vec<Vec<f64>>,
}

impl Intrinsic {
    /// Intrinsic distance, infinite across components.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if self.component[i] != self.component[j] {
            return f64::INFINITY;
        }
        let (a, b) = (&self.chart[i], &self.chart[j]);
        match self.geometry {
            ChartGeometry::Euclidean => Norm::Lp(2.0).distance(a, b),
            ChartGeometry::Circle => {
                let radius = 0.5 * (a[0] + b[0]);
                let mut dtheta = (a[1] - b[1]).rem_euclid(std::f64::consts::TAU);
                if dtheta > std::f64::consts::PI {
                    dtheta = std::f64::consts::TAU - dtheta;
                }
                radius * dtheta
            }
            ChartGeometry::Spiral => {
                let ds = spiral_arc_length(a[0]) - spiral_arc_length(b[0]);
                ds.hypot(a[1] - b[1])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub intrinsic: Option<Intrinsic>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(bad) = points.iter().position(|p| p.len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "point {bad} has dimension {} (expected {dim})",
                points[bad].len()
            )));
        }
        Ok(Self {
            dim,
            points,
            intrinsic: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize, norm: Norm) -> f64 {
        norm.distance(&self.points[i], &self.points[j])
    }

    /// The `k` nearest other points of `x`, as `(index, distance)` sorted by
    /// distance with ties broken by smaller index.
    pub fn knn(&self, x: usize, k: usize, norm: Norm) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = (0..self.len())
            .filter(|&j| j != x)
            .map(|j| (j, self.distance(x, j, norm)))
            .collect();
        let by_distance = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        if k < all.len() {
            all.select_nth_unstable_by(k, by_distance);
            all.truncate(k);
        }
        all.sort_by(by_distance);
        all
    }
}
