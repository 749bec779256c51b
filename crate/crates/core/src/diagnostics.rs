//! Consistency and robustness instrumentation: root sensitivity of
//! shortest-path-tree curvature, Dirac-limit sweeps, histograms, tree-mode
//! comparisons, and a flow-iteration benchmark.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CurvatureField, Method, TreeMode};
use crate::flow::{flow_step, FlowState};
use crate::graph::{EdgeId, NodeId, WeightedGraph};
use crate::measures::{build_measures, MeasureSpec};
use crate::orc::orc_field_with;
use crate::points::{Norm, PointCloud};
use crate::sobolev::{build_tree, src_field_on_tree, src_terms, EdgeTerms};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSensitivityRecord {
    pub roots: (NodeId, NodeId),
    /// `|E(T_r) △ E(T_r')|`.
    pub delta_tree_edges: usize,
    /// Mean over edges of `|κ_r − κ_r'|`.
    pub l1_curvature_diff: f64,
    /// `l1_curvature_diff / delta_tree_edges`; absent when the trees agree.
    pub ratio: Option<f64>,
    pub ell_max: f64,
    pub d_min: f64,
    pub s_max: f64,
    /// `ell_max (1 / d_min + s_max / d_min²)`.
    pub bound_constant: f64,
}

impl RootSensitivityRecord {
    pub fn within_bound(&self) -> bool {
        match self.ratio {
            Some(r) => r <= self.bound_constant,
            None => self.l1_curvature_diff == 0.0,
        }
    }
}

/// Compares shortest-path-tree curvature (`p = 1` in the bound, though any
/// `p` is evaluated) under roots `r` and `r2`, with all bound constants
/// taken from this instance.
pub fn root_sensitivity(
    graph: &WeightedGraph,
    spec: &MeasureSpec,
    p: f64,
    r: NodeId,
    r2: NodeId,
    cloud: Option<&PointCloud>,
) -> Result<RootSensitivityRecord> {
    graph.check_node(r)?;
    graph.check_node(r2)?;
    let measures = build_measures(graph, cloud, spec)?;
    let tree_a = build_tree(graph, TreeMode::Spt { root: r })?;
    let tree_b = build_tree(graph, TreeMode::Spt { root: r2 })?;
    let terms_a = src_terms(graph, &tree_a, &measures, p)?;
    let terms_b = src_terms(graph, &tree_b, &measures, p)?;
    let delta = tree_a.edge_set().symmetric_difference(&tree_b.edge_set()).count();
    let m = graph.edge_count().max(1) as f64;
    let l1 = terms_a
        .iter()
        .zip(&terms_b)
        .map(|(a, b)| (a.curvature() - b.curvature()).abs())
        .sum::<f64>()
        / m;
    let all = || terms_a.iter().chain(&terms_b);
    let d_min = all().map(|t| t.base).fold(f64::INFINITY, f64::min);
    let s_max = all().map(|t| t.transport).fold(0.0, f64::max);
    let ell_max = graph.edges().iter().map(|e| e.length).fold(0.0, f64::max);
    Ok(RootSensitivityRecord {
        roots: (r, r2),
        delta_tree_edges: delta,
        l1_curvature_diff: l1,
        ratio: (delta > 0).then(|| l1 / delta as f64),
        ell_max,
        d_min,
        s_max,
        bound_constant: ell_max * (1.0 / d_min + s_max / (d_min * d_min)),
    })
}

/// `count` seeded root pairs with distinct members (`n >= 2`).
pub fn random_root_pairs(n: usize, count: usize, seed: u64) -> Result<Vec<(NodeId, NodeId)>> {
    if n < 2 {
        return Err(Error::InvalidParameter("root pairs need at least two nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        })
        .collect())
}

/// Seeded sample of `count` distinct edge ids, ascending (all edges when
/// `count >= m`).
pub fn sample_edges(m: usize, count: usize, seed: u64) -> Vec<EdgeId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = rand::seq::index::sample(&mut rng, m, count.min(m)).into_vec();
    ids.sort_unstable();
    ids
}

/// Parameter schedule approaching the Dirac limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiracSchedule {
    /// Laziness values increasing toward 1.
    Alpha { values: Vec<f64> },
    /// Gaussian bandwidths decreasing toward 0.
    Sigma { values: Vec<f64>, k: usize, p_norm: Norm },
}

impl DiracSchedule {
    fn check(&self) -> Result<()> {
        let (values, increasing) = match self {
            DiracSchedule::Alpha { values } => (values, true),
            DiracSchedule::Sigma { values, .. } => (values, false),
        };
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty schedule".into()));
        }
        let monotone = values
            .windows(2)
            .all(|w| if increasing { w[0] <= w[1] } else { w[0] >= w[1] });
        if !monotone {
            return Err(Error::InvalidParameter(
                "schedule must move monotonically toward the limit".into(),
            ));
        }
        Ok(())
    }

    fn spec(&self, value: f64) -> MeasureSpec {
        match *self {
            DiracSchedule::Alpha { .. } => MeasureSpec::LazyRw { alpha: value },
            DiracSchedule::Sigma { k, p_norm, .. } => MeasureSpec::GaussianKnn {
                sigma: value,
                k,
                p_norm,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracSweepRow {
    pub parameter: f64,
    pub max_abs_src: f64,
    pub max_abs_orc: f64,
    /// Lazy family only: `(1 − α) Σλ / D_min` with `Σλ` the total tree
    /// length and `D_min` the smallest tree distance over evaluated edges.
    pub envelope: Option<f64>,
    /// Lazy family only: `(1 − α)(1 + Σλ / D_min)`, which holds for every
    /// instance.
    pub envelope_strict: Option<f64>,
}

/// Largest curvature magnitudes of both methods along a schedule. `edges`
/// restricts the maximum to a sample (all edges when `None`).
pub fn dirac_sweep(
    graph: &WeightedGraph,
    cloud: Option<&PointCloud>,
    edges: Option<&[EdgeId]>,
    schedule: &DiracSchedule,
    tree_mode: TreeMode,
    p: f64,
) -> Result<Vec<DiracSweepRow>> {
    schedule.check()?;
    let sample: Vec<EdgeId> = match edges {
        Some(ids) => {
            if let Some(&bad) = ids.iter().find(|&&e| e >= graph.edge_count()) {
                return Err(Error::InvalidParameter(format!("edge id {bad} out of range")));
            }
            ids.to_vec()
        }
        None => (0..graph.edge_count()).collect(),
    };
    let tree = build_tree(graph, tree_mode)?;
    let values = match schedule {
        DiracSchedule::Alpha { values } | DiracSchedule::Sigma { values, .. } => values,
    };
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let spec = schedule.spec(value);
        let measures = build_measures(graph, cloud, &spec)?;
        let terms = src_terms(graph, &tree, &measures, p)?;
        let orc = orc_field_with(graph, &measures, &spec)?;
        let max_over = |f: &dyn Fn(EdgeId) -> f64| sample.iter().map(|&e| f(e).abs()).fold(0.0, f64::max);
        let (envelope, envelope_strict) = match schedule {
            DiracSchedule::Alpha { .. } => {
                let d_min = sample.iter().map(|&e| terms[e].base).fold(f64::INFINITY, f64::min);
                let spread = tree.total_length() / d_min;
                (Some((1.0 - value) * spread), Some((1.0 - value) * (1.0 + spread)))
            }
            DiracSchedule::Sigma { .. } => (None, None),
        };
        rows.push(DiracSweepRow {
            parameter: value,
            max_abs_src: max_over(&|e| terms[e].curvature()),
            max_abs_orc: max_over(&|e| orc.get(e)),
            envelope,
            envelope_strict,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending bin edges; the last bin is closed.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Histogram over `[lo, hi]` with `bins` equal bins. Values outside the range
/// are clamped into the end bins.
pub fn histogram_in_range(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be positive".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("bad histogram range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0; bins];
    for &v in values {
        let idx = ((v - lo) / width).floor();
        let idx = if idx.is_nan() {
            0
        } else {
            (idx.max(0.0) as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Range covering all values, widened by 0.5 on each side when they agree.
pub fn value_range<'a>(values: impl IntoIterator<Item = &'a f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        None
    } else if lo == hi {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

pub fn curvature_histogram(field: &CurvatureField, bins: usize) -> Result<Histogram> {
    let (lo, hi) = value_range(&field.kappa).ok_or_else(|| Error::InvalidParameter("empty curvature field".into()))?;
    histogram_in_range(&field.kappa, bins, lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let q = |t: f64| crate::pruning::length_quantile(&sorted, t);
        Some(Self {
            mean,
            std: var.sqrt(),
            min: sorted[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModeSummary {
    pub mode: TreeMode,
    pub label: String,
    pub summary: Summary,
    pub histogram: Histogram,
    #[serde(skip)]
    pub field: Option<CurvatureField>,
}

/// SRC fields under the shortest-path tree from `root`, the MST, and one
/// random spanning tree per seed, with histograms on a shared range.
pub fn tree_robustness(
    graph: &WeightedGraph,
    spec: &MeasureSpec,
    p: f64,
    root: NodeId,
    seeds: &[u64],
    bins: usize,
    cloud: Option<&PointCloud>,
) -> Result<Vec<TreeModeSummary>> {
    graph.require_connected()?;
    if graph.edge_count() == 0 {
        return Err(Error::InvalidParameter("graph has no edges".into()));
    }
    let measures = build_measures(graph, cloud, spec)?;
    let mut modes = vec![TreeMode::Spt { root }, TreeMode::Mst];
    modes.extend(seeds.iter().map(|&seed| TreeMode::Random { seed }));
    let fields: Vec<CurvatureField> = modes
        .iter()
        .map(|&mode| {
            let tree = build_tree(graph, mode)?;
            src_field_on_tree(graph, &tree, &measures, mode, spec, p)
        })
        .collect::<Result<_>>()?;
    let (lo, hi) = value_range(fields.iter().flat_map(|f| &f.kappa)).expect("nonempty fields");
    modes
        .into_iter()
        .zip(fields)
        .map(|(mode, field)| {
            Ok(TreeModeSummary {
                mode,
                label: mode.label().to_string(),
                summary: Summary::of(&field.kappa).expect("nonempty field"),
                histogram: histogram_in_range(&field.kappa, bins, lo, hi)?,
                field: Some(field),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub graph: String,
    pub method: String,
    pub n: usize,
    pub m: usize,
    pub mean_degree: f64,
    /// Median wall time of one flow iteration over the repetitions.
    pub median_ms: f64,
    /// Interquartile range of the per-repetition times.
    pub iqr_ms: f64,
    pub repetitions: usize,
    pub iterations: usize,
    pub threads: usize,
}

/// Times flow iterations for every (graph, method) pair. One untimed step
/// warms caches; each repetition then runs `iterations` steps from the same
/// starting state and records the mean time per step.
pub fn bench(
    graphs: &[(String, WeightedGraph)],
    methods: &[Method],
    spec: &MeasureSpec,
    repetitions: usize,
    iterations: usize,
) -> Result<Vec<BenchRecord>> {
    if repetitions < 3 {
        return Err(Error::InvalidParameter("at least 3 repetitions are needed".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be positive".into()));
    }
    let mut records = Vec::new();
    for (name, graph) in graphs {
        for &method in methods {
            let start_state = FlowState::new(graph, method, spec, None)?;
            flow_step(graph, &start_state, method, spec, None)?;
            let mut times = Vec::with_capacity(repetitions);
            for _ in 0..repetitions {
                let mut state = start_state.clone();
                let clock = Instant::now();
                for _ in 0..iterations {
                    state = flow_step(graph, &state, method, spec, None)?;
                }
                times.push(clock.elapsed().as_secs_f64() * 1e3 / iterations as f64);
            }
            let s = Summary::of(&times).expect("repetitions > 0");
            records.push(BenchRecord {
                graph: name.clone(),
                method: method.label().to_string(),
                n: graph.node_count(),
                m: graph.edge_count(),
                mean_degree: graph.mean_degree(),
                median_ms: s.median,
                iqr_ms: s.q3 - s.q1,
                repetitions,
                iterations,
                threads: rayon::current_num_threads(),
            });
        }
    }
    Ok(records)
}

/// The per-edge `S` and `D` terms behind a shortest-path-tree field, for
/// reporting how far non-tree edges detour through the tree.
pub fn detour_ratios(terms: &[EdgeTerms], graph: &WeightedGraph, p: f64) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .zip(terms)
        .map(|(e, t)| t.base / e.length.powf(1.0 / p))
        .collect()
}
