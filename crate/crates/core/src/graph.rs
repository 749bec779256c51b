//! Undirected graphs with strictly positive edge lengths.
//!
//! Node ids are dense `0..n`. Edges are stored once with `u < v`, and edge ids
//! follow insertion order, which every per-edge output (curvature fields, flow
//! weights, pruning masks) uses as its index.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub length: f64,
}

impl Edge {
    /// The endpoint opposite to `x`.
    pub fn other(&self, x: NodeId) -> NodeId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    /// Per node: `(neighbor, edge id)`, sorted by neighbor id.
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    index: HashMap<(NodeId, NodeId), EdgeId>,
    connected: bool,
}

fn key(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl WeightedGraph {
    /// Builds a graph whose node count is one past the largest id mentioned.
    pub fn from_edges(edge_list: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let n = edge_list.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        Self::with_nodes(n, edge_list)
    }

    /// Builds a graph on exactly `node_count` nodes; ids beyond it are rejected.
    pub fn with_nodes(node_count: usize, edge_list: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut index = HashMap::with_capacity(edge_list.len());
        let mut adjacency = vec![Vec::new(); node_count];
        for &(a, b, length) in edge_list {
            if a >= node_count {
                return Err(Error::UnknownNode(a));
            }
            if b >= node_count {
                return Err(Error::UnknownNode(b));
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !(length > 0.0) || !length.is_finite() {
                return Err(Error::NonPositiveLength { u: a, v: b, length });
            }
            let (u, v) = key(a, b);
            if index.insert((u, v), edges.len()).is_some() {
                return Err(Error::DuplicateEdge(u, v));
            }
            adjacency[u].push((v, edges.len()));
            adjacency[v].push((u, edges.len()));
            edges.push(Edge { u, v, length });
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let connected = is_connected(node_count, &adjacency);
        Ok(Self {
            node_count,
            edges,
            adjacency,
            index,
            connected,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }

    pub fn neighbors(&self, x: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: NodeId) -> usize {
        self.adjacency[x].len()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.node_count == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.node_count as f64
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.connected {
            Ok(())
        } else {
            Err(Error::DisconnectedGraph)
        }
    }

    pub fn check_node(&self, x: NodeId) -> Result<()> {
        if x < self.node_count {
            Ok(())
        } else {
            Err(Error::UnknownNode(x))
        }
    }

    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.index.get(&key(u, v)).copied()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Same topology with new per-edge lengths (indexed by edge id).
    pub fn with_lengths(&self, lengths: &[f64]) -> Result<Self> {
        if lengths.len() != self.edges.len() {
            return Err(Error::SizeMismatch {
                left: lengths.len(),
                right: self.edges.len(),
            });
        }
        let mut edges = self.edges.clone();
        for (e, &length) in edges.iter_mut().zip(lengths) {
            if !(length > 0.0) || !length.is_finite() {
                return Err(Error::NonPositiveLength { u: e.u, v: e.v, length });
            }
            e.length = length;
        }
        Ok(Self { edges, ..self.clone() })
    }

    /// Same nodes, keeping only the edges where `keep[id]` is true.
    /// Returns the subgraph and the map from new edge ids to old ones.
    pub fn edge_subgraph(&self, keep: &[bool]) -> (Self, Vec<EdgeId>) {
        let kept: Vec<EdgeId> = (0..self.edges.len()).filter(|&i| keep[i]).collect();
        let list: Vec<_> = kept
            .iter()
            .map(|&i| (self.edges[i].u, self.edges[i].v, self.edges[i].length))
            .collect();
        let graph = Self::with_nodes(self.node_count, &list).expect("subgraph of a valid graph is valid");
        (graph, kept)
    }

    /// Connected components as a per-node component id, numbered by smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.node_count];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.node_count {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adjacency[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

fn is_connected(n: usize, adjacency: &[Vec<(NodeId, EdgeId)>]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &(y, _) in &adjacency[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == n
}
