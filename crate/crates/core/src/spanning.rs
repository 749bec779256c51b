//! Spanning-tree extraction: Kruskal MST and seeded random spanning trees.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, WeightedGraph};

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

fn accept_in_order(graph: &WeightedGraph, order: impl IntoIterator<Item = EdgeId>) -> Result<Vec<EdgeId>> {
    graph.require_connected()?;
    let n = graph.node_count();
    let mut uf = UnionFind::new(n);
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    for id in order {
        let e = graph.edge(id);
        if uf.union(e.u, e.v) {
            chosen.push(id);
            if chosen.len() + 1 == n {
                break;
            }
        }
    }
    if chosen.len() + 1 != n.max(1) {
        return Err(Error::DisconnectedGraph);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Minimum spanning tree by Kruskal. Ties are broken by a stable sort on
/// `(length, min endpoint, max endpoint)`. Returns edge ids in ascending order.
pub fn kruskal_mst(graph: &WeightedGraph) -> Result<Vec<EdgeId>> {
    let mut order: Vec<EdgeId> = (0..graph.edge_count()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (graph.edge(a), graph.edge(b));
        ea.length
            .total_cmp(&eb.length)
            .then(ea.u.cmp(&eb.u))
            .then(ea.v.cmp(&eb.v))
    });
    accept_in_order(graph, order)
}

/// Spanning tree from a seeded shuffle of the edges fed through union-find.
pub fn random_spanning_tree(graph: &WeightedGraph, seed: u64) -> Result<Vec<EdgeId>> {
    let mut order: Vec<EdgeId> = (0..graph.edge_count()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    accept_in_order(graph, order)
}
