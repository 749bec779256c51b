//! Seeded synthetic data: stochastic block models and sampled manifolds with
//! kNN graphs carrying ground-truth shortcut labels.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::points::{ChartGeometry, Intrinsic, Norm, PointCloud};

/// A graph with optional ground truth: node communities or edge shortcut flags.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: WeightedGraph,
    pub communities: Option<Vec<usize>>,
    /// Per edge id.
    pub shortcuts: Option<Vec<bool>>,
}

pub const SBM_MAX_ATTEMPTS: usize = 20;

/// Equal-block SBM with unit edge lengths. Pairs in the same block connect
/// with probability `p_intra`, pairs across blocks with `rho * p_intra`.
/// Disconnected draws are redrawn from a derived seed.
pub fn sbm(n: usize, blocks: usize, p_intra: f64, rho: f64, seed: u64) -> Result<LabeledGraph> {
    if blocks == 0 || !n.is_multiple_of(blocks) {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must be divisible by K = {blocks}"
        )));
    }
    let p_inter = rho * p_intra;
    for (name, p) in [("p_intra", p_intra), ("rho * p_intra", p_inter)] {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!("{name} = {p} outside (0, 1]")));
        }
    }
    let size = n / blocks;
    let communities: Vec<usize> = (0..n).map(|i| i / size).collect();
    for attempt in 0..SBM_MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((attempt as u64) << 32));
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = if communities[i] == communities[j] {
                    p_intra
                } else {
                    p_inter
                };
                if rng.random::<f64>() < p {
                    edges.push((i, j, 1.0));
                }
            }
        }
        let graph = WeightedGraph::with_nodes(n, &edges)?;
        if graph.is_connected() {
            return Ok(LabeledGraph {
                graph,
                communities: Some(communities),
                shortcuts: None,
            });
        }
    }
    Err(Error::CannotConnect(SBM_MAX_ATTEMPTS))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    ConcentricCircles,
    Moons,
    SCurve,
    SwissRoll3d,
}

impl ManifoldKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "concentric_circles" => Ok(Self::ConcentricCircles),
            "moons" => Ok(Self::Moons),
            "s_curve" => Ok(Self::SCurve),
            "swiss_roll_3d" | "3D_swiss_roll" => Ok(Self::SwissRoll3d),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ConcentricCircles => "concentric_circles",
            Self::Moons => "moons",
            Self::SCurve => "s_curve",
            Self::SwissRoll3d => "swiss_roll_3d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldConfig {
    pub kind: ManifoldKind,
    pub n: usize,
    /// Standard deviation of isotropic Gaussian coordinate noise.
    pub noise: f64,
    pub seed: u64,
    /// Circle radii (concentric circles only).
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl ManifoldConfig {
    pub fn new(kind: ManifoldKind, n: usize, noise: f64, seed: u64) -> Self {
        Self {
            kind,
            n,
            noise,
            seed,
            inner_radius: 1.0,
            outer_radius: 2.0,
        }
    }
}

pub fn manifold(config: &ManifoldConfig) -> Result<PointCloud> {
    let n = config.n;
    if n < 100 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 100")));
    }
    if !(config.noise >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise = {} must be >= 0",
            config.noise
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(n);
    let mut component = Vec::with_capacity(n);
    let mut chart = Vec::with_capacity(n);
    let geometry = match config.kind {
        ManifoldKind::ConcentricCircles => {
            let inner = n / 2;
            for i in 0..n {
                let (c, r) = if i < inner {
                    (0, config.inner_radius)
                } else {
                    (1, config.outer_radius)
                };
                let theta = rng.random::<f64>() * 2.0 * PI;
                points.push(vec![r * theta.cos(), r * theta.sin()]);
                component.push(c);
                chart.push(vec![r, theta]);
            }
            ChartGeometry::Circle
        }
        ManifoldKind::Moons => {
            let upper = n / 2;
            for i in 0..n {
                let t = rng.random::<f64>() * PI;
                if i < upper {
                    points.push(vec![t.cos(), t.sin()]);
                    component.push(0);
                } else {
                    points.push(vec![1.0 - t.cos(), 0.5 - t.sin()]);
                    component.push(1);
                }
                chart.push(vec![t]);
            }
            ChartGeometry::Euclidean
        }
        ManifoldKind::SCurve => {
            for _ in 0..n {
                let t = 3.0 * PI * (rng.random::<f64>() - 0.5);
                let h = 2.0 * rng.random::<f64>();
                points.push(vec![t.sin(), h, t.signum() * (t.cos() - 1.0)]);
                component.push(0);
                // unit-radius arcs: arc length equals |Δt|
                chart.push(vec![t, h]);
            }
            ChartGeometry::Euclidean
        }
        ManifoldKind::SwissRoll3d => {
            for _ in 0..n {
                let t = 1.5 * PI * (1.0 + 2.0 * rng.random::<f64>());
                let h = 21.0 * rng.random::<f64>();
                points.push(vec![t * t.cos(), h, t * t.sin()]);
                component.push(0);
                chart.push(vec![t, h]);
            }
            ChartGeometry::Spiral
        }
    };
    if config.noise > 0.0 {
        let normal = Normal::new(0.0, config.noise).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for p in &mut points {
            for x in p.iter_mut() {
                *x += normal.sample(&mut rng);
            }
        }
        // planar curves: re-read the angle from the noisy point so that
        // near neighbours keep a small intrinsic distance
        match config.kind {
            ManifoldKind::ConcentricCircles => {
                for (p, c) in points.iter().zip(chart.iter_mut()) {
                    c[1] = p[1].atan2(p[0]);
                }
            }
            ManifoldKind::Moons => {
                for ((p, c), &piece) in points.iter().zip(chart.iter_mut()).zip(&component) {
                    c[0] = if piece == 0 {
                        p[1].atan2(p[0])
                    } else {
                        (0.5 - p[1]).atan2(1.0 - p[0])
                    };
                }
            }
            ManifoldKind::SCurve | ManifoldKind::SwissRoll3d => {}
        }
    }
    let mut cloud = PointCloud::new(points)?;
    cloud.intrinsic = Some(Intrinsic {
        geometry,
        component,
        chart,
    });
    Ok(cloud)
}

/// When a kNN edge counts as a shortcut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortcutRule {
    /// Flag when intrinsic distance exceeds this multiple of the ambient
    /// distance. Edges across manifold components always count.
    pub ratio: f64,
}

impl Default for ShortcutRule {
    fn default() -> Self {
        Self { ratio: 3.0 }
    }
}

impl ShortcutRule {
    pub fn is_shortcut(&self, intrinsic: &Intrinsic, i: usize, j: usize, ambient: f64) -> bool {
        intrinsic.component[i] != intrinsic.component[j] || intrinsic.distance(i, j) > self.ratio * ambient
    }
}

/// Symmetric kNN graph (an edge whenever either endpoint selects the other)
/// with Euclidean edge lengths. Shortcut flags are attached when the cloud
/// carries intrinsic coordinates.
pub fn knn_graph_with_labels(cloud: &PointCloud, k: usize, rule: ShortcutRule) -> Result<LabeledGraph> {
    if k < 2 || k >= cloud.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must be in [2, {})",
            cloud.len()
        )));
    }
    let norm = Norm::Lp(2.0);
    let lists: Vec<Vec<(usize, f64)>> = (0..cloud.len())
        .into_par_iter()
        .map(|x| cloud.knn(x, k, norm))
        .collect();
    let mut pairs: Vec<(usize, usize, f64)> = lists
        .iter()
        .enumerate()
        .flat_map(|(x, list)| list.iter().map(move |&(y, d)| (x.min(y), x.max(y), d)))
        .collect();
    pairs.sort_by_key(|a| (a.0, a.1));
    pairs.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    let graph = WeightedGraph::with_nodes(cloud.len(), &pairs)?;
    let shortcuts = cloud.intrinsic.as_ref().map(|intr| {
        graph
            .edges()
            .iter()
            .map(|e| rule.is_shortcut(intr, e.u, e.v, e.length))
            .collect()
    });
    Ok(LabeledGraph {
        graph,
        communities: None,
        shortcuts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbm_shape() {
        let g = sbm(100, 2, 0.15, 0.1, 7).unwrap();
        assert!(g.graph.is_connected());
        let c = g.communities.as_ref().unwrap();
        assert_eq!(c.iter().filter(|&&b| b == 0).count(), 50);
        assert!(g.graph.edges().iter().all(|e| e.length == 1.0));
        assert!(sbm(101, 2, 0.15, 0.1, 7).is_err());
        assert!(sbm(100, 2, 0.15, 0.0, 7).is_err());
    }

    #[test]
    fn sbm_sparse_cannot_connect() {
        assert!(matches!(sbm(200, 2, 0.001, 0.01, 1), Err(Error::CannotConnect(20))));
    }

    #[test]
    fn circles_without_noise_sit_on_radii() {
        let cloud = manifold(&ManifoldConfig::new(ManifoldKind::ConcentricCircles, 200, 0.0, 3)).unwrap();
        for p in &cloud.points {
            let r = p[0].hypot(p[1]);
            assert!((r - 1.0).abs() < 1e-12 || (r - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn swiss_roll_matches_stored_parameter() {
        let cloud = manifold(&ManifoldConfig::new(ManifoldKind::SwissRoll3d, 300, 0.0, 3)).unwrap();
        let intr = cloud.intrinsic.as_ref().unwrap();
        for (p, c) in cloud.points.iter().zip(&intr.chart) {
            let t = c[0];
            assert!((p[0] - t * t.cos()).abs() < 1e-12);
            assert!((p[2] - t * t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn manifolds_are_seeded() {
        for kind in [
            ManifoldKind::ConcentricCircles,
            ManifoldKind::Moons,
            ManifoldKind::SCurve,
            ManifoldKind::SwissRoll3d,
        ] {
            let cfg = ManifoldConfig::new(kind, 150, 0.05, 11);
            assert_eq!(manifold(&cfg).unwrap(), manifold(&cfg).unwrap());
        }
        assert!(matches!(ManifoldKind::parse("torii"), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn separated_circles_have_no_shortcuts() {
        let cloud = manifold(&ManifoldConfig::new(ManifoldKind::ConcentricCircles, 400, 0.0, 5)).unwrap();
        let g = knn_graph_with_labels(&cloud, 5, ShortcutRule::default()).unwrap();
        assert!(g.shortcuts.unwrap().iter().all(|&s| !s));
    }

    #[test]
    fn touching_circles_flag_every_cross_edge() {
        let mut cfg = ManifoldConfig::new(ManifoldKind::ConcentricCircles, 400, 0.0, 5);
        cfg.outer_radius = 1.02;
        let cloud = manifold(&cfg).unwrap();
        let g = knn_graph_with_labels(&cloud, 10, ShortcutRule::default()).unwrap();
        let intr = cloud.intrinsic.as_ref().unwrap();
        let flags = g.shortcuts.as_ref().unwrap();
        let mut cross = 0;
        for (e, &flag) in g.graph.edges().iter().zip(flags) {
            let is_cross = intr.component[e.u] != intr.component[e.v];
            assert_eq!(flag, is_cross);
            cross += is_cross as usize;
        }
        assert!(cross > 0);
    }
}
