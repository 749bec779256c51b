//! Curvature-guided removal of shortcut edges from kNN graphs.
//!
//! Two stages: edges with curvature at most `-1 + 4(1 - δ)` become
//! candidates, and a candidate is removed when its endpoints are far apart
//! once the edge is gone, relative to `length / λ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CurvatureField, Method};
use crate::flow::curvature;
use crate::graph::{EdgeId, NodeId, WeightedGraph};
use crate::measures::MeasureSpec;
use crate::paths::distance_avoiding;
use crate::points::PointCloud;

/// Curvature threshold `-1 + 4(1 - δ)`.
pub fn curvature_threshold(delta: f64) -> f64 {
    -1.0 + 4.0 * (1.0 - delta)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    Ok(())
}

/// Edge ids with `κ <= -1 + 4(1 - δ)`, ascending.
pub fn curvature_filter(field: &CurvatureField, delta: f64) -> Result<Vec<EdgeId>> {
    check_delta(delta)?;
    let threshold = curvature_threshold(delta);
    Ok((0..field.len()).filter(|&e| field.get(e) <= threshold).collect())
}

/// True when the `u`–`v` distance in the graph without `e` exceeds
/// `length(e) / λ` (a bridge always passes).
pub fn detour_test(graph: &WeightedGraph, e: EdgeId, lambda: f64) -> Result<bool> {
    check_lambda(lambda)?;
    if e >= graph.edge_count() {
        return Err(Error::InvalidParameter(format!("edge id {e} out of range")));
    }
    let mut excluded = vec![false; graph.edge_count()];
    excluded[e] = true;
    Ok(detour_exceeds(graph, e, &excluded, lambda))
}

fn detour_exceeds(graph: &WeightedGraph, e: EdgeId, excluded: &[bool], lambda: f64) -> bool {
    let edge = graph.edge(e);
    distance_avoiding(graph, edge.u, edge.v, excluded) > edge.length / lambda
}

/// Which edges are absent when measuring a candidate's detour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DetourGraph {
    /// Only the candidate itself.
    #[default]
    WithoutEdge,
    /// Every stage-one candidate, so parallel shortcuts cannot vouch for
    /// each other.
    WithoutCandidates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManlParams {
    pub delta: f64,
    pub lambda: f64,
    pub detour: DetourGraph,
    /// Filter/confirm rounds; curvature is recomputed on the pruned graph
    /// before every round after the first.
    pub rounds: usize,
}

impl ManlParams {
    pub fn new(delta: f64, lambda: f64) -> Self {
        Self {
            delta,
            lambda,
            detour: DetourGraph::default(),
            rounds: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub round: usize,
    pub candidates: usize,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningReport {
    pub method: String,
    pub params: Option<ManlParams>,
    /// Removed edges as `(u, v)` node pairs, ascending by edge id.
    pub removed_edges: Vec<(NodeId, NodeId)>,
    #[serde(skip)]
    pub removed_ids: Vec<EdgeId>,
    /// Fraction of true shortcuts removed; `None` without labels or with no
    /// shortcuts present.
    pub tp_rate: Option<f64>,
    /// Fraction of non-shortcut edges removed; `None` without labels.
    pub fp_rate: Option<f64>,
    pub true_shortcuts: Option<usize>,
    pub stage_counts: Vec<StageCounts>,
}

impl PruningReport {
    fn build(
        graph: &WeightedGraph,
        method: String,
        params: Option<ManlParams>,
        removed_ids: Vec<EdgeId>,
        stage_counts: Vec<StageCounts>,
        shortcuts: Option<&[bool]>,
    ) -> Result<Self> {
        let (tp_rate, fp_rate, true_shortcuts) = match shortcuts {
            Some(labels) => {
                let (tp, fp) = rates(labels, &removed_ids)?;
                (tp, Some(fp), Some(labels.iter().filter(|&&s| s).count()))
            }
            None => (None, None, None),
        };
        Ok(Self {
            method,
            params,
            removed_edges: removed_ids
                .iter()
                .map(|&e| (graph.edge(e).u, graph.edge(e).v))
                .collect(),
            removed_ids,
            tp_rate,
            fp_rate,
            true_shortcuts,
            stage_counts,
        })
    }

    /// Like `rates` but failing with `MissingLabels` when labels were absent.
    pub fn require_rates(&self) -> Result<(Option<f64>, f64)> {
        self.fp_rate.map(|fp| (self.tp_rate, fp)).ok_or(Error::MissingLabels)
    }
}

/// `(tp_rate, fp_rate)` of a removal set against per-edge shortcut labels.
pub fn rates(shortcuts: &[bool], removed: &[EdgeId]) -> Result<(Option<f64>, f64)> {
    if let Some(&bad) = removed.iter().find(|&&e| e >= shortcuts.len()) {
        return Err(Error::InvalidParameter(format!("removed edge {bad} has no label")));
    }
    let positives = shortcuts.iter().filter(|&&s| s).count();
    let negatives = shortcuts.len() - positives;
    let hit = removed.iter().filter(|&&e| shortcuts[e]).count();
    let false_hit = removed.len() - hit;
    let tp = (positives > 0).then(|| hit as f64 / positives as f64);
    let fp = if negatives > 0 {
        false_hit as f64 / negatives as f64
    } else {
        0.0
    };
    Ok((tp, fp))
}

/// Confirms stage-one candidates with the detour rule.
pub fn confirm_candidates(
    graph: &WeightedGraph,
    candidates: &[EdgeId],
    lambda: f64,
    detour: DetourGraph,
) -> Result<Vec<EdgeId>> {
    check_lambda(lambda)?;
    let mut excluded = vec![false; graph.edge_count()];
    if detour == DetourGraph::WithoutCandidates {
        for &e in candidates {
            excluded[e] = true;
        }
    }
    Ok(candidates
        .par_iter()
        .filter(|&&e| {
            if detour == DetourGraph::WithoutEdge {
                let mut own = vec![false; graph.edge_count()];
                own[e] = true;
                detour_exceeds(graph, e, &own, lambda)
            } else {
                detour_exceeds(graph, e, &excluded, lambda)
            }
        })
        .copied()
        .collect())
}

/// Curvature on every connected component separately. Isolated nodes carry
/// no edges and are skipped. Point-cloud indices follow the component's
/// node relabelling.
pub fn componentwise_curvature(
    graph: &WeightedGraph,
    method: Method,
    spec: &MeasureSpec,
    cloud: Option<&PointCloud>,
) -> Result<CurvatureField> {
    if graph.is_connected() {
        return curvature(graph, method, spec, cloud);
    }
    let comp = graph.components();
    let count = comp.iter().max().map_or(0, |&c| c + 1);
    let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); count];
    let mut local = vec![0; graph.node_count()];
    for (v, &c) in comp.iter().enumerate() {
        local[v] = members[c].len();
        members[c].push(v);
    }
    let mut kappa = vec![0.0; graph.edge_count()];
    for nodes in members.iter().filter(|m| m.len() > 1) {
        let c = comp[nodes[0]];
        let ids: Vec<EdgeId> = (0..graph.edge_count())
            .filter(|&e| comp[graph.edge(e).u] == c)
            .collect();
        let list: Vec<_> = ids
            .iter()
            .map(|&e| {
                let edge = graph.edge(e);
                (local[edge.u], local[edge.v], edge.length)
            })
            .collect();
        let sub = WeightedGraph::with_nodes(nodes.len(), &list)?;
        let sub_cloud = cloud
            .map(|pc| PointCloud::new(nodes.iter().map(|&v| pc.points[v].clone()).collect()))
            .transpose()?;
        let field = curvature(&sub, method, spec, sub_cloud.as_ref())?;
        for (i, &e) in ids.iter().enumerate() {
            kappa[e] = field.get(i);
        }
    }
    Ok(CurvatureField::new(method, *spec, kappa))
}

/// Two-stage pruning starting from a precomputed field on `graph`.
/// Rounds after the first recompute curvature on the pruned graph, component
/// by component.
pub fn manl_prune(
    graph: &WeightedGraph,
    field: &CurvatureField,
    params: ManlParams,
    shortcuts: Option<&[bool]>,
    cloud: Option<&PointCloud>,
) -> Result<PruningReport> {
    check_delta(params.delta)?;
    check_lambda(params.lambda)?;
    field.check_covers(graph)?;
    if params.rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    let mut alive = vec![true; graph.edge_count()];
    let mut removed = Vec::new();
    let mut stage_counts = Vec::new();
    for round in 0..params.rounds {
        let (current, to_original) = graph.edge_subgraph(&alive);
        let current_field = if round == 0 {
            CurvatureField::new(
                field.params.method,
                field.params.measure,
                to_original.iter().map(|&e| field.get(e)).collect(),
            )
        } else {
            componentwise_curvature(&current, field.params.method, &field.params.measure, cloud)?
        };
        let candidates = curvature_filter(&current_field, params.delta)?;
        let confirmed = confirm_candidates(&current, &candidates, params.lambda, params.detour)?;
        stage_counts.push(StageCounts {
            round: round + 1,
            candidates: candidates.len(),
            removed: confirmed.len(),
        });
        if confirmed.is_empty() {
            break;
        }
        for e in confirmed {
            let original = to_original[e];
            alive[original] = false;
            removed.push(original);
        }
    }
    removed.sort_unstable();
    PruningReport::build(
        graph,
        format!("{}-MANL", field.params.label),
        Some(params),
        removed,
        stage_counts,
        shortcuts,
    )
}

/// Stage one alone: every candidate is removed.
pub fn curvature_only(
    graph: &WeightedGraph,
    field: &CurvatureField,
    delta: f64,
    shortcuts: Option<&[bool]>,
) -> Result<PruningReport> {
    field.check_covers(graph)?;
    let removed = curvature_filter(field, delta)?;
    let counts = vec![StageCounts {
        round: 1,
        candidates: removed.len(),
        removed: removed.len(),
    }];
    PruningReport::build(
        graph,
        format!("{} only", field.params.label),
        None,
        removed,
        counts,
        shortcuts,
    )
}

/// Baseline removing every edge longer than the given quantile of lengths.
pub fn distance_only(graph: &WeightedGraph, quantile: f64, shortcuts: Option<&[bool]>) -> Result<PruningReport> {
    if !(0.0..=1.0).contains(&quantile) {
        return Err(Error::InvalidParameter(format!("quantile = {quantile} outside [0, 1]")));
    }
    let threshold = length_quantile(&graph.lengths(), quantile);
    let removed: Vec<EdgeId> = (0..graph.edge_count())
        .filter(|&e| graph.edge(e).length > threshold)
        .collect();
    let counts = vec![StageCounts {
        round: 1,
        candidates: removed.len(),
        removed: removed.len(),
    }];
    PruningReport::build(graph, "distance-only".into(), None, removed, counts, shortcuts)
}

/// Linear-interpolation quantile; 0 for an empty slice.
pub fn length_quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}
