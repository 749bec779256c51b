//! Exact Ollivier–Ricci curvature: `κ(x, y) = 1 - W_1(μ_x, μ_y) / d(x, y)`
//! with the graph shortest-path metric as ground cost.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CurvatureField, Method};
use crate::graph::{NodeId, WeightedGraph};
use crate::measures::{build_measures, DiscreteMeasure, MeasureSpec};
use crate::paths::distances_from;
use crate::points::PointCloud;
use crate::transport::{exact_w1, TransportProblem};

/// Shortest-path distances from a set of source nodes, computed up front
/// (in parallel) and read-only afterwards.
#[derive(Debug, Clone)]
pub struct GroundMetric {
    rows: Vec<Option<Vec<f64>>>,
}

impl GroundMetric {
    pub fn from_sources(graph: &WeightedGraph, sources: impl IntoIterator<Item = NodeId>) -> Self {
        let sources: BTreeSet<NodeId> = sources.into_iter().collect();
        let computed: Vec<(NodeId, Vec<f64>)> = sources
            .into_par_iter()
            .map(|s| (s, distances_from(graph, s).dist))
            .collect();
        let mut rows = vec![None; graph.node_count()];
        for (s, d) in computed {
            rows[s] = Some(d);
        }
        Self { rows }
    }

    pub fn all_pairs(graph: &WeightedGraph) -> Self {
        Self::from_sources(graph, 0..graph.node_count())
    }

    /// Sources needed to evaluate every edge: all support nodes of the
    /// measures at edge endpoints.
    pub fn for_edges(graph: &WeightedGraph, measures: &[DiscreteMeasure]) -> Self {
        let mut needed = BTreeSet::new();
        for e in graph.edges() {
            needed.extend(measures[e.u].support().iter().copied());
            needed.extend(measures[e.v].support().iter().copied());
        }
        Self::from_sources(graph, needed)
    }

    pub fn dist(&self, from: NodeId, to: NodeId) -> Result<f64> {
        self.rows
            .get(from)
            .and_then(|r| r.as_ref())
            .map(|r| r[to])
            .ok_or(Error::UnknownNode(from))
    }
}

/// The transportation problem between two measures under `metric`.
pub fn transport_problem(
    metric: &GroundMetric,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<TransportProblem> {
    let mut cost = Vec::with_capacity(mu.len() * nu.len());
    for &a in mu.support() {
        for &b in nu.support() {
            let d = metric.dist(a, b)?;
            if !d.is_finite() {
                return Err(Error::DisconnectedGraph);
            }
            cost.push(d);
        }
    }
    TransportProblem::new(mu.masses().to_vec(), nu.masses().to_vec(), cost)
}

pub fn orc_edge(
    metric: &GroundMetric,
    mu_x: &DiscreteMeasure,
    mu_y: &DiscreteMeasure,
    x: NodeId,
    y: NodeId,
) -> Result<f64> {
    if x == y {
        return Err(Error::SameNode(x));
    }
    let d = metric.dist(x, y)?;
    let w1 = exact_w1(&transport_problem(metric, mu_x, mu_y)?)?;
    Ok(1.0 - w1 / d)
}

pub fn orc_field(graph: &WeightedGraph, spec: &MeasureSpec, cloud: Option<&PointCloud>) -> Result<CurvatureField> {
    graph.require_connected()?;
    let measures = build_measures(graph, cloud, spec)?;
    orc_field_with(graph, &measures, spec)
}

pub fn orc_field_with(
    graph: &WeightedGraph,
    measures: &[DiscreteMeasure],
    spec: &MeasureSpec,
) -> Result<CurvatureField> {
    let metric = GroundMetric::for_edges(graph, measures);
    let kappa = graph
        .edges()
        .par_iter()
        .map(|e| orc_edge(&metric, &measures[e.u], &measures[e.v], e.u, e.v))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CurvatureField::new(Method::Orc, *spec, kappa))
}
