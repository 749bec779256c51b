//! Sobolev transport on a rooted tree and the Sobolev–Ricci curvature.
//!
//! For a rooted tree `T` with edge lengths `λ`, write `F_μ(e)` for the mass
//! that `μ` places below edge `e` (its cut mass). Then
//!
//! ```text
//! S_p(μ, ν) = ( Σ_e λ(e) |F_μ(e) - F_ν(e)|^p )^(1/p)
//! D_p(x, y) = S_p(δ_x, δ_y) = d_T(x, y)^(1/p)
//! κ(x, y)   = 1 - S_p(μ_x, μ_y) / D_p(x, y)
//! ```
//!
//! Cut masses are computed by pushing each support mass up to the root, so a
//! measure with support `s` costs `O(s · height)` and is stored sparsely.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CurvatureField, Method, TreeMode};
use crate::graph::{NodeId, WeightedGraph};
use crate::measures::{build_measures, DiscreteMeasure, MeasureSpec};
use crate::paths::dijkstra;
use crate::points::PointCloud;
use crate::spanning::{kruskal_mst, random_spanning_tree};
use crate::tree::RootedTree;

/// Cut masses of one measure, keyed by the child endpoint of each tree edge.
/// Only edges with nonzero mass below them are stored, sorted by child id.
#[derive(Debug, Clone, PartialEq)]
pub struct CutMass {
    entries: Vec<(NodeId, f64)>,
}

impl CutMass {
    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn get(&self, child: NodeId) -> f64 {
        self.entries
            .binary_search_by_key(&child, |e| e.0)
            .map_or(0.0, |i| self.entries[i].1)
    }

    /// Dense vector indexed by child node (the root's slot stays 0).
    pub fn to_dense(&self, node_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; node_count];
        for &(c, m) in &self.entries {
            out[c] = m;
        }
        out
    }
}

pub fn cut_mass(tree: &RootedTree, mu: &DiscreteMeasure) -> Result<CutMass> {
    let root = tree.root();
    let mut pushed: Vec<(NodeId, f64)> = Vec::with_capacity(mu.len() * (tree.height() + 1));
    for (v, m) in mu.iter() {
        tree.check_node(v)?;
        let mut x = v;
        while x != root {
            pushed.push((x, m));
            x = tree.parent(x);
        }
    }
    pushed.sort_unstable_by_key(|e| e.0);
    let mut entries: Vec<(NodeId, f64)> = Vec::with_capacity(pushed.len());
    for (c, m) in pushed {
        match entries.last_mut() {
            Some(last) if last.0 == c => last.1 += m,
            _ => entries.push((c, m)),
        }
    }
    for e in &mut entries {
        e.1 = e.1.min(1.0);
    }
    Ok(CutMass { entries })
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Sobolev exponent p = {p} must be finite and >= 1"
        )))
    }
}

#[inline]
fn term(length: f64, diff: f64, p: f64) -> f64 {
    let d = diff.abs();
    if p == 1.0 {
        length * d
    } else if p == 2.0 {
        length * d * d
    } else {
        length * d.powf(p)
    }
}

#[inline]
fn root_p(sum: f64, p: f64) -> f64 {
    if p == 1.0 {
        sum
    } else if p == 2.0 {
        sum.sqrt()
    } else {
        sum.powf(1.0 / p)
    }
}

/// `S_p` between two measures given their cut masses on `tree`.
pub fn sobolev_distance_cut(tree: &RootedTree, a: &CutMass, b: &CutMass, p: f64) -> f64 {
    let (ea, eb) = (&a.entries, &b.entries);
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    while i < ea.len() || j < eb.len() {
        let ca = ea.get(i).map_or(usize::MAX, |e| e.0);
        let cb = eb.get(j).map_or(usize::MAX, |e| e.0);
        let (child, diff) = if ca == cb {
            i += 1;
            j += 1;
            (ca, ea[i - 1].1 - eb[j - 1].1)
        } else if ca < cb {
            i += 1;
            (ca, ea[i - 1].1)
        } else {
            j += 1;
            (cb, eb[j - 1].1)
        };
        sum += term(tree.parent_length(child), diff, p);
    }
    root_p(sum, p)
}

/// `S_p` over dense cut-mass vectors; touches every tree edge.
pub fn sobolev_distance_dense(tree: &RootedTree, a: &[f64], b: &[f64], p: f64) -> f64 {
    let root = tree.root();
    let sum: f64 = (0..tree.node_count())
        .filter(|&c| c != root)
        .map(|c| term(tree.parent_length(c), a[c] - b[c], p))
        .sum();
    root_p(sum, p)
}

/// Between two Diracs the distance is the tree path length itself, taken
/// from the same computation as `D_p` so their ratio is exactly one.
fn dirac_pair_distance(tree: &RootedTree, mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Option<Result<f64>> {
    if !(mu.is_dirac() && nu.is_dirac()) {
        return None;
    }
    let (a, b) = (mu.support()[0], nu.support()[0]);
    Some(if a == b { Ok(0.0) } else { dirac_distance(tree, a, b, p) })
}

pub fn sobolev_distance(tree: &RootedTree, mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if let Some(d) = dirac_pair_distance(tree, mu, nu, p) {
        return d;
    }
    Ok(sobolev_distance_cut(
        tree,
        &cut_mass(tree, mu)?,
        &cut_mass(tree, nu)?,
        p,
    ))
}

/// `D_p(x, y)`: the tree path length raised to `1/p`.
pub fn dirac_distance(tree: &RootedTree, x: NodeId, y: NodeId, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if x == y {
        return Err(Error::SameNode(x));
    }
    Ok(root_p(tree.path_length(x, y)?, p))
}

pub fn src_edge(
    tree: &RootedTree,
    mu_x: &DiscreteMeasure,
    mu_y: &DiscreteMeasure,
    x: NodeId,
    y: NodeId,
    p: f64,
) -> Result<f64> {
    let d = dirac_distance(tree, x, y, p)?;
    let s = sobolev_distance(tree, mu_x, mu_y, p)?;
    Ok(1.0 - s / d)
}

/// Extracts and roots the spanning tree selected by `mode`. MST and random
/// trees are rooted at node 0.
pub fn build_tree(graph: &WeightedGraph, mode: TreeMode) -> Result<RootedTree> {
    graph.require_connected()?;
    match mode {
        TreeMode::Spt { root } => Ok(dijkstra(graph, root)?.1),
        TreeMode::Mst => RootedTree::from_graph_edges(graph, &kruskal_mst(graph)?, 0),
        TreeMode::Random { seed } => RootedTree::from_graph_edges(graph, &random_spanning_tree(graph, seed)?, 0),
    }
}

/// Per-edge transport cost `S` and base distance `D` on one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeTerms {
    pub transport: f64,
    pub base: f64,
}

impl EdgeTerms {
    pub fn curvature(&self) -> f64 {
        1.0 - self.transport / self.base
    }
}

/// `S_p(μ_x, μ_y)` and `D_p(x, y)` for every graph edge, with cut masses
/// computed once per node. The output order follows edge ids regardless of
/// how the work is split across threads.
pub fn src_terms(
    graph: &WeightedGraph,
    tree: &RootedTree,
    measures: &[DiscreteMeasure],
    p: f64,
) -> Result<Vec<EdgeTerms>> {
    check_exponent(p)?;
    if measures.len() != graph.node_count() {
        return Err(Error::SizeMismatch {
            left: measures.len(),
            right: graph.node_count(),
        });
    }
    let cuts: Vec<CutMass> = measures.iter().map(|m| cut_mass(tree, m)).collect::<Result<_>>()?;
    graph
        .edges()
        .par_iter()
        .map(|e| {
            let transport = match dirac_pair_distance(tree, &measures[e.u], &measures[e.v], p) {
                Some(d) => d?,
                None => sobolev_distance_cut(tree, &cuts[e.u], &cuts[e.v], p),
            };
            Ok(EdgeTerms {
                transport,
                base: dirac_distance(tree, e.u, e.v, p)?,
            })
        })
        .collect()
}

/// Same as [`src_terms`] with dense cut-mass vectors (`O(n)` per edge).
pub fn src_terms_dense(
    graph: &WeightedGraph,
    tree: &RootedTree,
    measures: &[DiscreteMeasure],
    p: f64,
) -> Result<Vec<EdgeTerms>> {
    check_exponent(p)?;
    let n = graph.node_count();
    let dense: Vec<Vec<f64>> = measures
        .iter()
        .map(|m| cut_mass(tree, m).map(|c| c.to_dense(n)))
        .collect::<Result<_>>()?;
    graph
        .edges()
        .par_iter()
        .map(|e| {
            let transport = match dirac_pair_distance(tree, &measures[e.u], &measures[e.v], p) {
                Some(d) => d?,
                None => sobolev_distance_dense(tree, &dense[e.u], &dense[e.v], p),
            };
            Ok(EdgeTerms {
                transport,
                base: dirac_distance(tree, e.u, e.v, p)?,
            })
        })
        .collect()
}

/// Sobolev–Ricci curvature of every edge on one shared tree.
pub fn src_field(
    graph: &WeightedGraph,
    mode: TreeMode,
    spec: &MeasureSpec,
    p: f64,
    cloud: Option<&PointCloud>,
) -> Result<CurvatureField> {
    let tree = build_tree(graph, mode)?;
    let measures = build_measures(graph, cloud, spec)?;
    src_field_on_tree(graph, &tree, &measures, mode, spec, p)
}

pub fn src_field_on_tree(
    graph: &WeightedGraph,
    tree: &RootedTree,
    measures: &[DiscreteMeasure],
    mode: TreeMode,
    spec: &MeasureSpec,
    p: f64,
) -> Result<CurvatureField> {
    let kappa = src_terms(graph, tree, measures, p)?
        .iter()
        .map(EdgeTerms::curvature)
        .collect();
    Ok(CurvatureField::new(Method::Src { tree: mode, p }, *spec, kappa))
}
