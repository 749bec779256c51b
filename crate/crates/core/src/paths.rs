//! Single-source shortest paths and shortest-path trees.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::Result;
use crate::graph::{EdgeId, NodeId, WeightedGraph};
use crate::tree::RootedTree;

/// Shortest-path distances from one source.
#[derive(Debug, Clone)]
pub struct PathMetric {
    pub source: NodeId,
    pub dist: Vec<f64>,
}

impl PathMetric {
    pub fn get(&self, v: NodeId) -> f64 {
        self.dist[v]
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Item {
    dist: f64,
    node: NodeId,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const TIE_TOLERANCE: f64 = 1e-12;

#[inline]
fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Core Dijkstra loop. `skip` masks out edges; `target` allows early exit.
/// Returns distances and predecessors (`usize::MAX` when unreached).
fn run(
    graph: &WeightedGraph,
    lengths: Option<&[f64]>,
    source: NodeId,
    skip: Option<&dyn Fn(EdgeId) -> bool>,
    target: Option<NodeId>,
) -> (Vec<f64>, Vec<NodeId>) {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    pred[source] = source;
    heap.push(Item {
        dist: 0.0,
        node: source,
    });
    while let Some(Item { dist: d, node: x }) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        if Some(x) == target {
            break;
        }
        for &(y, id) in graph.neighbors(x) {
            if done[y] || skip.is_some_and(|f| f(id)) {
                continue;
            }
            let w = lengths.map_or_else(|| graph.edge(id).length, |l| l[id]);
            let nd = d + w;
            if dist[y].is_finite() && ties(nd, dist[y]) {
                if x < pred[y] {
                    pred[y] = x;
                }
                if nd < dist[y] {
                    dist[y] = nd;
                    heap.push(Item { dist: nd, node: y });
                }
            } else if nd < dist[y] {
                dist[y] = nd;
                pred[y] = x;
                heap.push(Item { dist: nd, node: y });
            }
        }
    }
    (dist, pred)
}

/// Shortest-path distances and the shortest-path tree rooted at `source`.
///
/// Among predecessors reaching a node at equal distance (relative tolerance
/// 1e-12) the smallest node id wins.
pub fn dijkstra(graph: &WeightedGraph, source: NodeId) -> Result<(PathMetric, RootedTree)> {
    graph.check_node(source)?;
    graph.require_connected()?;
    let (dist, pred) = run(graph, None, source, None, None);
    let parent_length: Vec<f64> = (0..graph.node_count())
        .map(|v| {
            if v == source {
                0.0
            } else {
                let id = graph.edge_id(v, pred[v]).expect("predecessor edge exists");
                graph.edge(id).length
            }
        })
        .collect();
    let tree = RootedTree::from_parents(&pred, &parent_length, source)?;
    Ok((PathMetric { source, dist }, tree))
}

/// Distances only; unreachable nodes get `f64::INFINITY`.
pub fn distances_from(graph: &WeightedGraph, source: NodeId) -> PathMetric {
    let (dist, _) = run(graph, None, source, None, None);
    PathMetric { source, dist }
}

/// Distances under overriding per-edge lengths.
pub fn distances_with_lengths(graph: &WeightedGraph, lengths: &[f64], source: NodeId) -> Vec<f64> {
    run(graph, Some(lengths), source, None, None).0
}

/// Shortest `u`–`v` distance avoiding every edge with `excluded[id] == true`.
pub fn distance_avoiding(graph: &WeightedGraph, u: NodeId, v: NodeId, excluded: &[bool]) -> f64 {
    let skip = |id: EdgeId| excluded[id];
    run(graph, None, u, Some(&skip), Some(v)).0[v]
}

/// For every edge `(x, y)`, the shortest-path distance between `x` and `y`
/// (which may be shorter than the edge itself).
pub fn edge_endpoint_distances(graph: &WeightedGraph) -> Vec<f64> {
    let per_source: Vec<Vec<(EdgeId, f64)>> = (0..graph.node_count())
        .into_par_iter()
        .map(|x| {
            let later: Vec<_> = graph.neighbors(x).iter().filter(|&&(y, _)| y > x).copied().collect();
            if later.is_empty() {
                return Vec::new();
            }
            let dist = run(graph, None, x, None, None).0;
            later.into_iter().map(|(y, id)| (id, dist[y])).collect()
        })
        .collect();
    let mut out = vec![0.0; graph.edge_count()];
    for (id, d) in per_source.into_iter().flatten() {
        out[id] = d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> WeightedGraph {
        WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }

    #[test]
    fn path_graph() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let (d, t) = dijkstra(&g, 0).unwrap();
        assert_eq!(d.get(2), 2.0);
        assert_eq!(t.parent(2), 1);
        assert_eq!(t.parent(1), 0);
    }

    #[test]
    fn cycle_tie_breaks_to_smallest_id() {
        let (d, t) = dijkstra(&cycle4(), 0).unwrap();
        assert_eq!(d.get(2), 2.0);
        // 2 is reachable through 1 and through 3 at distance 2
        assert_eq!(t.parent(2), 1);
        assert_eq!(t.parent(3), 0);
        // 2 and 3 hang on different branches: 2-1-0-3
        assert_eq!(t.path_length(2, 3).unwrap(), 3.0);
    }

    #[test]
    fn single_node_source() {
        let g = WeightedGraph::with_nodes(1, &[]).unwrap();
        let (d, t) = dijkstra(&g, 0).unwrap();
        assert_eq!(d.dist, vec![0.0]);
        assert!(t.tree_edges().is_empty());
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(dijkstra(&g, 0).is_err());
        assert!(distances_from(&g, 0).dist[3].is_infinite());
    }

    #[test]
    fn avoiding_an_edge() {
        let g = cycle4();
        let mut excluded = vec![false; 4];
        excluded[g.edge_id(0, 1).unwrap()] = true;
        assert_eq!(distance_avoiding(&g, 0, 1, &excluded), 3.0);
    }

    #[test]
    fn endpoint_distances_can_beat_the_edge() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]).unwrap();
        assert_eq!(edge_endpoint_distances(&g), vec![1.0, 1.0, 2.0]);
    }
}
