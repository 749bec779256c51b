//! Neighborhood probability measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::points::{Norm, PointCloud};

const MASS_TOLERANCE: f64 = 1e-12;

/// A finitely supported probability measure on graph nodes. Support ids are
/// unique and sorted; masses are positive and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Vec<NodeId>,
    mass: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from `(node, mass)` pairs. Duplicate nodes are merged
    /// and zero masses dropped; the total must be 1 within 1e-12.
    pub fn from_pairs(mut pairs: Vec<(NodeId, f64)>) -> Result<Self> {
        if let Some(&(v, m)) = pairs.iter().find(|p| !(p.1 >= 0.0) || !p.1.is_finite()) {
            return Err(Error::InvalidMeasure(format!("mass {m} at node {v}")));
        }
        pairs.sort_by_key(|p| p.0);
        let mut support: Vec<NodeId> = Vec::with_capacity(pairs.len());
        let mut mass: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, m) in pairs {
            if support.last() == Some(&v) {
                *mass.last_mut().unwrap() += m;
            } else {
                support.push(v);
                mass.push(m);
            }
        }
        let keep: Vec<bool> = mass.iter().map(|&m| m > 0.0).collect();
        let mut k = keep.iter();
        support.retain(|_| *k.next().unwrap());
        mass.retain(|&m| m > 0.0);
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("total mass {total}")));
        }
        Ok(Self { support, mass })
    }

    pub fn dirac(x: NodeId) -> Self {
        Self {
            support: vec![x],
            mass: vec![1.0],
        }
    }

    pub fn support(&self) -> &[NodeId] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.support.iter().copied().zip(self.mass.iter().copied())
    }

    pub fn get(&self, v: NodeId) -> f64 {
        self.support.binary_search(&v).map_or(0.0, |i| self.mass[i])
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn is_dirac(&self) -> bool {
        self.support.len() == 1
    }

    /// Total variation distance `sup_A |mu(A) - nu(A)|`.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let mut diff = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let a = self.support.get(i).copied().unwrap_or(usize::MAX);
            let b = other.support.get(j).copied().unwrap_or(usize::MAX);
            if a == b {
                diff += (self.mass[i] - other.mass[j]).abs();
                i += 1;
                j += 1;
            } else if a < b {
                diff += self.mass[i];
                i += 1;
            } else {
                diff += other.mass[j];
                j += 1;
            }
        }
        0.5 * diff
    }
}

/// Which neighborhood measure to attach to every node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Dirac,
    LazyRw { alpha: f64 },
    GaussianKnn { sigma: f64, k: usize, p_norm: Norm },
}

impl MeasureSpec {
    pub fn lazy(alpha: f64) -> Self {
        MeasureSpec::LazyRw { alpha }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MeasureSpec::Dirac => Ok(()),
            MeasureSpec::LazyRw { alpha } => {
                if (0.0..=1.0).contains(&alpha) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1]")))
                }
            }
            MeasureSpec::GaussianKnn { sigma, k, p_norm } => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::DegenerateSigma(sigma));
                }
                if k == 0 {
                    return Err(Error::InvalidParameter("k must be positive".into()));
                }
                p_norm.validate().map(|_| ())
            }
        }
    }
}

pub fn dirac(node_count: usize, x: NodeId) -> Result<DiscreteMeasure> {
    if x >= node_count {
        return Err(Error::UnknownNode(x));
    }
    Ok(DiscreteMeasure::dirac(x))
}

/// Mass `alpha` at `x` and `(1 - alpha) / deg(x)` on each neighbor.
pub fn lazy_rw_measure(graph: &WeightedGraph, x: NodeId, alpha: f64) -> Result<DiscreteMeasure> {
    graph.check_node(x)?;
    MeasureSpec::lazy(alpha).validate()?;
    if alpha == 1.0 {
        return Ok(DiscreteMeasure::dirac(x));
    }
    let deg = graph.degree(x);
    if deg == 0 {
        return Err(Error::IsolatedNode(x));
    }
    let share = (1.0 - alpha) / deg as f64;
    let mut pairs = Vec::with_capacity(deg + 1);
    pairs.push((x, alpha));
    pairs.extend(graph.neighbors(x).iter().map(|&(y, _)| (y, share)));
    DiscreteMeasure::from_pairs(pairs)
}

/// Gaussian weights `exp(-|x - v|^2 / sigma^2)` over `x` and its `k` nearest
/// neighbors, normalized to one. `x` itself is part of the neighborhood, so a
/// vanishing bandwidth collapses the measure onto `x`.
pub fn gaussian_knn_measure(
    cloud: &PointCloud,
    x: usize,
    k: usize,
    sigma: f64,
    p_norm: Norm,
) -> Result<DiscreteMeasure> {
    if x >= cloud.len() {
        return Err(Error::UnknownNode(x));
    }
    MeasureSpec::GaussianKnn { sigma, k, p_norm }.validate()?;
    if k >= cloud.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must be below the number of points {}",
            cloud.len()
        )));
    }
    let mut neighborhood = vec![(x, 0.0)];
    neighborhood.extend(cloud.knn(x, k, p_norm));
    let exponents: Vec<f64> = neighborhood.iter().map(|&(_, d)| -(d * d) / (sigma * sigma)).collect();
    // x contributes exponent 0, the maximum, so the normalizer is at least 1.
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|e| (e - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    let pairs = neighborhood
        .iter()
        .zip(&weights)
        .map(|(&(v, _), &w)| (v, w / z))
        .collect();
    DiscreteMeasure::from_pairs(pairs)
}

/// One measure per node, as selected by `spec`. Gaussian measures need the
/// point cloud whose indices coincide with the graph's node ids.
pub fn build_measures(
    graph: &WeightedGraph,
    cloud: Option<&PointCloud>,
    spec: &MeasureSpec,
) -> Result<Vec<DiscreteMeasure>> {
    spec.validate()?;
    let n = graph.node_count();
    match *spec {
        MeasureSpec::Dirac => Ok((0..n).map(DiscreteMeasure::dirac).collect()),
        MeasureSpec::LazyRw { alpha } => (0..n).map(|x| lazy_rw_measure(graph, x, alpha)).collect(),
        MeasureSpec::GaussianKnn { sigma, k, p_norm } => {
            let cloud =
                cloud.ok_or_else(|| Error::InvalidParameter("Gaussian kNN measures need a point cloud".into()))?;
            if cloud.len() != n {
                return Err(Error::SizeMismatch {
                    left: cloud.len(),
                    right: n,
                });
            }
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|x| gaussian_knn_measure(cloud, x, k, sigma, p_norm))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WeightedGraph {
        WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn dirac_basics() {
        let m = dirac(5, 3).unwrap();
        assert_eq!(m.support(), &[3]);
        assert_eq!(m.total_mass(), 1.0);
        assert!(matches!(dirac(2, 3), Err(Error::UnknownNode(3))));
    }

    #[test]
    fn lazy_walk_on_path() {
        let m = lazy_rw_measure(&path3(), 1, 0.5).unwrap();
        assert_eq!(m.support(), &[0, 1, 2]);
        assert_eq!(m.masses(), &[0.25, 0.5, 0.25]);
        assert_eq!(lazy_rw_measure(&path3(), 1, 1.0).unwrap(), DiscreteMeasure::dirac(1));
    }

    #[test]
    fn lazy_walk_alpha_zero_is_uniform() {
        let star = WeightedGraph::from_edges(&[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let m = lazy_rw_measure(&star, 0, 0.0).unwrap();
        assert_eq!(m.support(), &[1, 2, 3]);
        for &w in m.masses() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lazy_walk_errors() {
        let g = WeightedGraph::with_nodes(3, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(lazy_rw_measure(&g, 2, 0.5), Err(Error::IsolatedNode(2))));
        assert!(lazy_rw_measure(&g, 2, 1.0).is_ok());
        assert!(lazy_rw_measure(&g, 0, 1.5).is_err());
    }

    #[test]
    fn total_variation_to_dirac_is_one_minus_alpha() {
        let g = path3();
        for alpha in [0.0, 0.3, 0.9, 0.999] {
            let m = lazy_rw_measure(&g, 1, alpha).unwrap();
            let tv = m.total_variation(&DiscreteMeasure::dirac(1));
            assert!((tv - (1.0 - alpha)).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_two_points() {
        let d = 0.7;
        let sigma = 0.5;
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![d, 0.0]]).unwrap();
        let m = gaussian_knn_measure(&cloud, 0, 1, sigma, Norm::default()).unwrap();
        let far = (-(d * d) / (sigma * sigma)).exp();
        let z = 1.0 + far;
        assert!((m.get(0) - 1.0 / z).abs() < 1e-15);
        assert!((m.get(1) - far / z).abs() < 1e-15);
    }

    #[test]
    fn gaussian_wide_bandwidth_is_uniform() {
        let cloud = PointCloud::new((0..6).map(|i| vec![i as f64, (i * i) as f64]).collect()).unwrap();
        let m = gaussian_knn_measure(&cloud, 2, 3, 1e6, Norm::default()).unwrap();
        assert_eq!(m.len(), 4);
        for &w in m.masses() {
            assert!((w - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn gaussian_narrow_bandwidth_is_numerically_dirac() {
        let cloud = PointCloud::new(vec![vec![0.0], vec![1.0], vec![3.0], vec![3.5]]).unwrap();
        let min_d = 0.5;
        let m = gaussian_knn_measure(&cloud, 3, 2, 0.01 * min_d, Norm::default()).unwrap();
        assert!(m.get(3) >= 1.0 - 1e-9);
        assert!(matches!(
            gaussian_knn_measure(&cloud, 0, 2, 0.0, Norm::default()),
            Err(Error::DegenerateSigma(_))
        ));
        assert!(gaussian_knn_measure(&cloud, 0, 4, 1.0, Norm::default()).is_err());
    }

    #[test]
    fn from_pairs_validates() {
        assert!(DiscreteMeasure::from_pairs(vec![(0, 0.5)]).is_err());
        assert!(DiscreteMeasure::from_pairs(vec![(0, 1.5), (1, -0.5)]).is_err());
        let m = DiscreteMeasure::from_pairs(vec![(2, 0.25), (0, 0.5), (2, 0.25), (5, 0.0)]).unwrap();
        assert_eq!(m.support(), &[0, 2]);
        assert_eq!(m.masses(), &[0.5, 0.5]);
    }
}
