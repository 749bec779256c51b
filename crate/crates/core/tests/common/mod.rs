//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sobolev_ricci::{DiscreteMeasure, NodeId, PointCloud, WeightedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random labelled tree: each node attaches to an earlier one, then labels
/// are shuffled.
pub fn random_tree_edges(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<(NodeId, NodeId, f64)> {
    let mut label: Vec<NodeId> = (0..n).collect();
    label.shuffle(rng);
    (1..n)
        .map(|i| {
            let j = rng.random_range(0..i);
            (label[i], label[j], rng.random_range(lo..=hi))
        })
        .collect()
}

pub fn random_tree(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> WeightedGraph {
    WeightedGraph::from_edges(&random_tree_edges(rng, n, lo, hi)).unwrap()
}

/// Connected graph: a random tree plus `extra` random chords.
pub fn random_connected(rng: &mut impl Rng, n: usize, extra: usize, lo: f64, hi: f64) -> WeightedGraph {
    let mut edges = random_tree_edges(rng, n, lo, hi);
    let mut seen: std::collections::HashSet<(NodeId, NodeId)> =
        edges.iter().map(|&(u, v, _)| (u.min(v), u.max(v))).collect();
    let mut attempts = 0;
    while seen.len() < n - 1 + extra && attempts < 50 * (extra + 1) {
        attempts += 1;
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v && seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v, rng.random_range(lo..=hi)));
        }
    }
    WeightedGraph::from_edges(&edges).unwrap()
}

pub fn random_cloud(rng: &mut impl Rng, n: usize, dim: usize) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect(),
    )
    .unwrap()
}

/// Probability measure on at most `support` distinct nodes of `0..n`.
pub fn random_measure(rng: &mut impl Rng, n: usize, support: usize) -> DiscreteMeasure {
    let mut nodes: Vec<NodeId> = (0..n).collect();
    nodes.shuffle(rng);
    let k = rng.random_range(1..=support.min(n));
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let z: f64 = raw.iter().sum();
    DiscreteMeasure::from_pairs(nodes[..k].iter().zip(&raw).map(|(&v, &w)| (v, w / z)).collect()).unwrap()
}

/// Measure whose masses are multiples of `1 / atoms`.
pub fn random_atomic_measure(rng: &mut impl Rng, n: usize, atoms: usize) -> (DiscreteMeasure, Vec<NodeId>) {
    let placed: Vec<NodeId> = (0..atoms).map(|_| rng.random_range(0..n)).collect();
    let mut mass = vec![0.0; n];
    for &v in &placed {
        mass[v] += 1.0 / atoms as f64;
    }
    let pairs = mass
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(v, &m)| (v, m))
        .collect();
    (DiscreteMeasure::from_pairs(pairs).unwrap(), placed)
}

/// Single-source distances by Bellman–Ford relaxation.
pub fn bellman_ford(graph: &WeightedGraph, source: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.node_count()];
    dist[source] = 0.0;
    for _ in 0..graph.node_count() {
        let mut changed = false;
        for e in graph.edges() {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                if dist[a] + e.length < dist[b] {
                    dist[b] = dist[a] + e.length;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Distances from `source` through the unique paths of a tree, by BFS.
pub fn tree_distances(n: usize, edges: &[(NodeId, NodeId, f64)], source: NodeId) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, l) in edges {
        adj[u].push((v, l));
        adj[v].push((u, l));
    }
    let mut dist = vec![f64::NAN; n];
    dist[source] = 0.0;
    let mut queue = VecDeque::from([source]);
    while let Some(x) = queue.pop_front() {
        for &(y, l) in &adj[x] {
            if dist[y].is_nan() {
                dist[y] = dist[x] + l;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Nodes reachable from `v` without passing through `parent`.
pub fn flood_fill(n: usize, edges: &[(NodeId, NodeId)], v: NodeId, parent: Option<NodeId>) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    seen[v] = true;
    if let Some(p) = parent {
        seen[p] = true;
    }
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    if let Some(p) = parent {
        seen[p] = false;
    }
    seen
}

/// Cheapest matching of equal-mass atoms over all permutations. Equals the
/// transport cost because the transportation polytope with integral margins
/// has integral vertices.
pub fn assignment_brute_force(cost: impl Fn(NodeId, NodeId) -> f64, from: &[NodeId], to: &[NodeId]) -> f64 {
    fn rec(
        cost: &dyn Fn(NodeId, NodeId) -> f64,
        from: &[NodeId],
        to: &[NodeId],
        used: &mut Vec<bool>,
        i: usize,
        acc: f64,
        best: &mut f64,
    ) {
        if acc >= *best {
            return;
        }
        if i == from.len() {
            *best = acc;
            return;
        }
        for j in 0..to.len() {
            if !used[j] {
                used[j] = true;
                rec(cost, from, to, used, i + 1, acc + cost(from[i], to[j]), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(&cost, from, to, &mut vec![false; to.len()], 0, 0.0, &mut best);
    best / from.len() as f64
}

/// Modularity straight from its definition over node pairs.
pub fn modularity_by_pairs(n: usize, edges: &[(NodeId, NodeId, f64)], labels: &[usize], resolution: f64) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        a[u][v] += w;
        a[v][u] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - resolution * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `0..n` as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, current: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(current.clone());
            return;
        }
        for label in 0..=max + 1 {
            current.push(label);
            rec(i + 1, n, current, max.max(label), out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![Vec::new()];
    }
    rec(1, n, &mut vec![0], 0, &mut out);
    out
}

/// Adjusted Rand index from the contingency table, with pair counts summed
/// directly over node pairs.
pub fn ari_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let (sa, sb) = (a[i] == a[j], b[i] == b[j]);
            both += f64::from(u8::from(sa && sb));
            in_a += f64::from(u8::from(sa));
            in_b += f64::from(u8::from(sb));
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = in_a * in_b / pairs;
    let max = (in_a + in_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}
