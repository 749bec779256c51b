//! Rooted spanning trees with Euler-interval subtree encoding.
//!
//! Each non-root node `c` owns the tree edge to its parent. The cut set of that
//! edge (the side not containing the root) is the subtree of `c`, which is the
//! node set `{v : dfs_in[c] <= dfs_in[v] < dfs_out[c]}`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, WeightedGraph};

#[derive(Debug, Clone)]
pub struct RootedTree {
    root: NodeId,
    parent: Vec<NodeId>,
    parent_length: Vec<f64>,
    children: Vec<Vec<NodeId>>,
    dfs_in: Vec<usize>,
    dfs_out: Vec<usize>,
    depth: Vec<usize>,
    dist_to_root: Vec<f64>,
    preorder: Vec<NodeId>,
}

impl RootedTree {
    /// Roots the spanning tree given by `edges` (`(u, v, length)` triples) at `root`.
    /// Children are visited in ascending id order.
    pub fn new(node_count: usize, edges: &[(NodeId, NodeId, f64)], root: NodeId) -> Result<Self> {
        if root >= node_count {
            return Err(Error::UnknownNode(root));
        }
        if edges.len() + 1 != node_count {
            return Err(Error::NotATree(format!(
                "{} edges for {} nodes",
                edges.len(),
                node_count
            )));
        }
        let mut adjacency: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); node_count];
        for &(u, v, length) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::UnknownNode(u.max(v)));
            }
            if u == v {
                return Err(Error::NotATree(format!("self-loop at {u}")));
            }
            adjacency[u].push((v, length));
            adjacency[v].push((u, length));
        }
        for list in &mut adjacency {
            list.sort_by_key(|a| a.0);
        }

        let mut parent = vec![usize::MAX; node_count];
        let mut parent_length = vec![0.0; node_count];
        let mut children = vec![Vec::new(); node_count];
        let mut dfs_in = vec![0; node_count];
        let mut dfs_out = vec![0; node_count];
        let mut depth = vec![0; node_count];
        let mut dist_to_root = vec![0.0; node_count];
        let mut preorder = Vec::with_capacity(node_count);

        parent[root] = root;
        // (node, next adjacency index)
        let mut stack = vec![(root, 0usize)];
        dfs_in[root] = 0;
        preorder.push(root);
        while let Some(&mut (x, ref mut next)) = stack.last_mut() {
            if let Some(&(y, length)) = adjacency[x].get(*next) {
                *next += 1;
                if y == parent[x] && x != root {
                    continue;
                }
                if parent[y] != usize::MAX {
                    return Err(Error::NotATree(format!("cycle through edge ({x}, {y})")));
                }
                parent[y] = x;
                parent_length[y] = length;
                depth[y] = depth[x] + 1;
                dist_to_root[y] = dist_to_root[x] + length;
                children[x].push(y);
                dfs_in[y] = preorder.len();
                preorder.push(y);
                stack.push((y, 0));
            } else {
                dfs_out[x] = preorder.len();
                stack.pop();
            }
        }
        if preorder.len() != node_count {
            return Err(Error::NotATree("edges do not span all nodes".into()));
        }
        Ok(Self {
            root,
            parent,
            parent_length,
            children,
            dfs_in,
            dfs_out,
            depth,
            dist_to_root,
            preorder,
        })
    }

    /// Roots the tree formed by a subset of graph edges.
    pub fn from_graph_edges(graph: &WeightedGraph, tree_edges: &[EdgeId], root: NodeId) -> Result<Self> {
        let list: Vec<_> = tree_edges
            .iter()
            .map(|&id| {
                let e = graph.edge(id);
                (e.u, e.v, e.length)
            })
            .collect();
        Self::new(graph.node_count(), &list, root)
    }

    /// Builds the tree from parent pointers (the root points to itself).
    pub fn from_parents(parent: &[NodeId], parent_length: &[f64], root: NodeId) -> Result<Self> {
        let list: Vec<_> = (0..parent.len())
            .filter(|&v| v != root)
            .map(|v| (parent[v], v, parent_length[v]))
            .collect();
        Self::new(parent.len(), &list, root)
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> NodeId {
        self.parent[v]
    }

    /// Length of the tree edge between `c` and its parent (0 at the root).
    pub fn parent_length(&self, c: NodeId) -> f64 {
        self.parent_length[c]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    pub fn dist_to_root(&self, v: NodeId) -> f64 {
        self.dist_to_root[v]
    }

    pub fn dfs_interval(&self, v: NodeId) -> (usize, usize) {
        (self.dfs_in[v], self.dfs_out[v])
    }

    pub fn preorder(&self) -> &[NodeId] {
        &self.preorder
    }

    /// Maximum hop depth.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Whether `v` lies in the cut set of the tree edge above `c`.
    #[inline]
    pub fn in_subtree(&self, c: NodeId, v: NodeId) -> bool {
        self.dfs_in[c] <= self.dfs_in[v] && self.dfs_in[v] < self.dfs_out[c]
    }

    /// Tree edges as `(child, length)`, in child-id order.
    pub fn tree_edges(&self) -> Vec<(NodeId, f64)> {
        (0..self.node_count())
            .filter(|&c| c != self.root)
            .map(|c| (c, self.parent_length[c]))
            .collect()
    }

    /// Tree edges as unordered `(min, max)` node pairs.
    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        (0..self.node_count())
            .filter(|&c| c != self.root)
            .map(|c| {
                let p = self.parent[c];
                (c.min(p), c.max(p))
            })
            .collect()
    }

    pub fn total_length(&self) -> f64 {
        self.parent_length.iter().sum()
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    pub fn lca(&self, u: NodeId, v: NodeId) -> Result<NodeId> {
        self.check_node(u)?;
        self.check_node(v)?;
        let (mut a, mut b) = (u, v);
        while self.depth[a] > self.depth[b] {
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b];
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
        }
        Ok(a)
    }

    /// Sum of edge lengths on the unique tree path between `u` and `v`.
    pub fn path_length(&self, u: NodeId, v: NodeId) -> Result<f64> {
        if u == v {
            self.check_node(u)?;
            return Ok(0.0);
        }
        let w = self.lca(u, v)?;
        // Summing along the path avoids cancellation in dist_to_root differences.
        let mut total = 0.0;
        for mut x in [u, v] {
            while x != w {
                total += self.parent_length[x];
                x = self.parent[x];
            }
        }
        Ok(total)
    }

    /// Child endpoints of the tree edges on the path between `u` and `v`.
    pub fn path_edges(&self, u: NodeId, v: NodeId) -> Result<Vec<NodeId>> {
        let w = self.lca(u, v)?;
        let mut out = Vec::new();
        for mut x in [u, v] {
            while x != w {
                out.push(x);
                x = self.parent[x];
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}
