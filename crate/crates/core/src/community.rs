//! Modularity clustering (Louvain) and partition comparison (adjusted Rand index).

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Community label per node, dense in `0..K` and numbered by first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn new<T: Eq + std::hash::Hash>(raw: &[T]) -> Self {
        let mut seen: HashMap<&T, usize> = HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
        }
    }

    pub fn single_block(n: usize) -> Self {
        Self { labels: vec![0; n] }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> usize {
        self.labels[v]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

fn check_weights(n: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<()> {
    for &(u, v, w) in edges {
        if u >= n || v >= n {
            return Err(Error::UnknownNode(u.max(v)));
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight {w} on ({u}, {v}) must be nonnegative"
            )));
        }
    }
    Ok(())
}

/// Newman modularity with resolution `γ`:
/// `Q = Σ_c [ in_c / 2m - γ (tot_c / 2m)^2 ]`.
pub fn modularity(n: usize, edges: &[(NodeId, NodeId, f64)], partition: &Partition, resolution: f64) -> Result<f64> {
    check_weights(n, edges)?;
    if partition.len() != n {
        return Err(Error::SizeMismatch {
            left: partition.len(),
            right: n,
        });
    }
    let k = partition.community_count();
    let mut inside = vec![0.0; k];
    let mut total = vec![0.0; k];
    let mut m2 = 0.0;
    for &(u, v, w) in edges {
        let (cu, cv) = (partition.label(u), partition.label(v));
        if cu == cv {
            inside[cu] += 2.0 * w;
        }
        total[cu] += w;
        total[cv] += w;
        m2 += 2.0 * w;
    }
    if m2 == 0.0 {
        return Ok(0.0);
    }
    Ok((0..k)
        .map(|c| inside[c] / m2 - resolution * (total[c] / m2).powi(2))
        .sum())
}

/// Weighted graph at one Louvain level. `loops[i]` is the diagonal entry
/// `A_ii` (twice the internal weight of an aggregated node).
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
}

impl Level {
    fn degree(&self, i: usize) -> f64 {
        self.loops[i] + self.adj[i].iter().map(|e| e.1).sum::<f64>()
    }
}

const GAIN_TOLERANCE: f64 = 1e-12;
const MAX_PASSES: usize = 1000;

/// Local moves until no node changes community. Returns the assignment and
/// whether any node moved.
fn local_moves(level: &Level, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = level.adj.len();
    let degree: Vec<f64> = (0..n).map(|i| level.degree(i)).collect();
    let m2: f64 = degree.iter().sum();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut links: HashMap<usize, f64> = HashMap::new();
    let mut any = false;
    for _ in 0..MAX_PASSES {
        let mut moved = false;
        for &i in &order {
            let ki = degree[i];
            let ci = comm[i];
            links.clear();
            for &(j, w) in &level.adj[i] {
                *links.entry(comm[j]).or_insert(0.0) += w;
            }
            tot[ci] -= ki;
            // gain of joining c, divided by 2m so the comparison is scale free
            let gain = |c: usize, w_ic: f64| w_ic / m2 - resolution * tot[c] * ki / (m2 * m2);
            let mut best = ci;
            let mut best_gain = gain(ci, links.get(&ci).copied().unwrap_or(0.0));
            let mut candidates: Vec<(usize, f64)> = links.iter().map(|(&c, &w)| (c, w)).collect();
            candidates.sort_unstable_by_key(|c| c.0);
            for (c, w_ic) in candidates {
                let g = gain(c, w_ic);
                if g > best_gain + GAIN_TOLERANCE {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best] += ki;
            if best != ci {
                comm[i] = best;
                moved = true;
                any = true;
            }
        }
        if !moved {
            break;
        }
    }
    (comm, any)
}

fn aggregate(level: &Level, comm: &[usize]) -> (Level, Vec<usize>) {
    let dense = Partition::new(comm);
    let k = dense.community_count();
    let mut loops = vec![0.0; k];
    let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); k];
    for i in 0..level.adj.len() {
        let ci = dense.label(i);
        loops[ci] += level.loops[i];
        for &(j, w) in &level.adj[i] {
            let cj = dense.label(j);
            if ci == cj {
                loops[ci] += w;
            } else {
                *maps[ci].entry(cj).or_insert(0.0) += w;
            }
        }
    }
    let adj = maps
        .into_iter()
        .map(|m| {
            let mut v: Vec<(usize, f64)> = m.into_iter().collect();
            v.sort_unstable_by_key(|e| e.0);
            v
        })
        .collect();
    (Level { adj, loops }, dense.labels)
}

/// Louvain modularity maximization: seeded local-move sweeps followed by
/// aggregation, repeated until a level makes no move.
pub fn louvain(n: usize, edges: &[(NodeId, NodeId, f64)], resolution: f64, seed: u64) -> Result<Partition> {
    check_weights(n, edges)?;
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} must be positive"
        )));
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        if w > 0.0 && u != v {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
    }
    let mut level = Level {
        adj,
        loops: vec![0.0; n],
    };
    let total: f64 = (0..n).map(|i| level.degree(i)).sum();
    if total == 0.0 {
        return Ok(Partition::singletons(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let (comm, moved) = local_moves(&level, resolution, &mut rng);
        if !moved {
            break;
        }
        let (next, dense) = aggregate(&level, &comm);
        for m in membership.iter_mut() {
            *m = dense[*m];
        }
        let shrank = next.adj.len() < level.adj.len();
        level = next;
        if !shrank {
            break;
        }
    }
    Ok(Partition::new(&membership))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub partition: Partition,
    pub resolution: f64,
    /// Modularity at resolution 1, used for selection.
    pub modularity: f64,
}

/// Runs Louvain at each resolution and keeps the partition with the highest
/// standard (resolution 1) modularity. Ties keep the earlier resolution.
pub fn louvain_grid(n: usize, edges: &[(NodeId, NodeId, f64)], resolutions: &[f64], seed: u64) -> Result<GridResult> {
    let mut best: Option<GridResult> = None;
    for &r in resolutions {
        let partition = louvain(n, edges, r, seed)?;
        let q = modularity(n, edges, &partition, 1.0)?;
        if best.as_ref().is_none_or(|b| q > b.modularity) {
            best = Some(GridResult {
                partition,
                resolution: r,
                modularity: q,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("empty resolution grid".into()))
}

pub const RESOLUTION_GRID: [f64; 5] = [0.5, 0.75, 1.0, 1.5, 2.0];

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index; 1 for identical partitions up to relabeling.
pub fn ari(p: &Partition, q: &Partition) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let n = p.len();
    if n < 2 {
        return Ok(1.0);
    }
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows = vec![0usize; p.community_count()];
    let mut cols = vec![0usize; q.community_count()];
    for (&a, &b) in p.labels().iter().zip(q.labels()) {
        *table.entry((a, b)).or_insert(0) += 1;
        rows[a] += 1;
        cols[b] += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c as f64)).sum();
    let sum_rows: f64 = rows.iter().map(|&c| choose2(c as f64)).sum();
    let sum_cols: f64 = cols.iter().map(|&c| choose2(c as f64)).sum();
    let expected = sum_rows * sum_cols / choose2(n as f64);
    let max = 0.5 * (sum_rows + sum_cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
