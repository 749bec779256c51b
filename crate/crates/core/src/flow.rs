//! Discrete Ricci flow on edge weights.
//!
//! One step maps weights `w` to `(1 - κ(x, y)) · d(x, y)` where `d` is the
//! shortest-path metric induced by `w` and `κ` the curvature computed under
//! `w`. Weights are then rescaled so that they sum to the number of edges.
//! The state keeps the curvature of the current weights, so each step costs
//! one curvature evaluation and `Δκ` compares consecutive fields.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CurvatureField, Method};
use crate::graph::WeightedGraph;
use crate::measures::MeasureSpec;
use crate::orc::orc_field;
use crate::paths::edge_endpoint_distances;
use crate::points::PointCloud;
use crate::sobolev::src_field;

/// Relative floor for updated weights, as a fraction of the mean.
pub const WEIGHT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub method: Method,
    pub measure: MeasureSpec,
    pub max_iters: usize,
    pub epsilon: f64,
}

impl FlowConfig {
    pub fn new(method: Method, measure: MeasureSpec) -> Self {
        Self {
            method,
            measure,
            max_iters: 20,
            epsilon: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub sum_w: f64,
    pub max_dkappa: f64,
    pub runtime_ms: f64,
    /// Edges whose updated weight hit the floor in this step.
    pub clamped: usize,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: usize,
    pub weights: Vec<f64>,
    /// Curvature under `weights`.
    pub last_field: CurvatureField,
    pub delta_kappa_trace: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
}

/// Curvature of `graph` (its current edge lengths) by either method.
pub fn curvature(
    graph: &WeightedGraph,
    method: Method,
    spec: &MeasureSpec,
    cloud: Option<&PointCloud>,
) -> Result<CurvatureField> {
    match method {
        Method::Src { tree, p } => src_field(graph, tree, spec, p, cloud),
        Method::Orc => orc_field(graph, spec, cloud),
    }
}

/// Rescales so the weights sum to their count.
pub fn normalize(weights: &[f64]) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    let scale = weights.len() as f64 / sum;
    weights.iter().map(|w| w * scale).collect()
}

/// `(1 - κ_e) · d_e` per edge, before clamping and normalization.
pub fn update_weights(kappa: &[f64], dist: &[f64]) -> Vec<f64> {
    kappa.iter().zip(dist).map(|(k, d)| (1.0 - k) * d).collect()
}

/// Replaces non-positive or tiny weights by `WEIGHT_FLOOR · mean`. Returns
/// the number of clamped entries.
pub fn clamp_weights(weights: &mut [f64]) -> Result<usize> {
    let mean = weights.iter().map(|w| w.max(0.0)).sum::<f64>() / weights.len().max(1) as f64;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::AllEdgesCollapsed);
    }
    let floor = WEIGHT_FLOOR * mean;
    let mut clamped = 0;
    for w in weights.iter_mut() {
        if *w < floor {
            *w = floor;
            clamped += 1;
        }
    }
    if clamped == weights.len() {
        return Err(Error::AllEdgesCollapsed);
    }
    Ok(clamped)
}

/// Exponential length-to-similarity map `exp(-β w)`.
pub fn to_similarity(weights: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    Ok(weights.iter().map(|w| (-beta * w).exp()).collect())
}

impl FlowState {
    /// Initial weights are the normalized shortest-path distances between
    /// edge endpoints under the input lengths.
    pub fn new(graph: &WeightedGraph, method: Method, spec: &MeasureSpec, cloud: Option<&PointCloud>) -> Result<Self> {
        graph.require_connected()?;
        if graph.edge_count() == 0 {
            return Err(Error::InvalidParameter("flow needs at least one edge".into()));
        }
        let weights = normalize(&edge_endpoint_distances(graph));
        let last_field = curvature(&graph.with_lengths(&weights)?, method, spec, cloud)?;
        Ok(Self {
            t: 0,
            weights,
            last_field,
            delta_kappa_trace: Vec::new(),
            records: Vec::new(),
            converged: false,
        })
    }

    pub fn last_delta(&self) -> Option<f64> {
        self.delta_kappa_trace.last().copied()
    }
}

pub fn flow_step(
    graph: &WeightedGraph,
    state: &FlowState,
    method: Method,
    spec: &MeasureSpec,
    cloud: Option<&PointCloud>,
) -> Result<FlowState> {
    let start = Instant::now();
    let current = graph.with_lengths(&state.weights)?;
    let dist = edge_endpoint_distances(&current);
    let mut raw = update_weights(&state.last_field.kappa, &dist);
    let clamped = clamp_weights(&mut raw)?;
    let weights = normalize(&raw);
    let field = curvature(&graph.with_lengths(&weights)?, method, spec, cloud)?;
    let delta = field.max_abs_diff(&state.last_field)?;

    let mut next = state.clone();
    next.t += 1;
    next.records.push(IterationRecord {
        t: next.t,
        sum_w: weights.iter().sum(),
        max_dkappa: delta,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        clamped,
    });
    next.weights = weights;
    next.last_field = field;
    next.delta_kappa_trace.push(delta);
    Ok(next)
}

/// Iterates until `config.max_iters` steps or the first step with
/// `Δκ < config.epsilon`.
pub fn run_flow(graph: &WeightedGraph, config: &FlowConfig, cloud: Option<&PointCloud>) -> Result<FlowState> {
    if config.max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    let mut state = FlowState::new(graph, config.method, &config.measure, cloud)?;
    while state.t < config.max_iters {
        state = flow_step(graph, &state, config.method, &config.measure, cloud)?;
        if state.last_delta().is_some_and(|d| d < config.epsilon) {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}
