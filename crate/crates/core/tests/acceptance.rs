//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (uncaptured) with the measured quantities, then asserts.

mod common;

use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;

use common::*;
use sobolev_ricci::community::{ari, louvain, Partition};
use sobolev_ricci::diagnostics::{bench, dirac_sweep, random_root_pairs, root_sensitivity, DiracSchedule};
use sobolev_ricci::flow::{flow_step, run_flow, to_similarity, FlowConfig, FlowState};
use sobolev_ricci::generators::{knn_graph_with_labels, manifold, sbm, ManifoldConfig, ManifoldKind, ShortcutRule};
use sobolev_ricci::measures::build_measures;
use sobolev_ricci::orc::orc_field;
use sobolev_ricci::pruning::{componentwise_curvature, curvature_filter, manl_prune, DetourGraph, ManlParams};
use sobolev_ricci::sobolev::{sobolev_distance, src_field};
use sobolev_ricci::transport::{exact_w1, TransportProblem};
use sobolev_ricci::{MeasureSpec, Method, Norm, RootedTree, TreeMode};

/// Serializes the criteria so timings are not disturbed by each other.
static LOCK: Mutex<()> = Mutex::new(());

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr().lock(),
        "acceptance #{id:<2} {status} {name}: {detail}"
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

#[test]
fn criterion_01_tree_equivalence() {
    let _g = lock();
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = r.random_range(2..=200);
        let tree = random_tree(&mut r, n, 0.1, 10.0);
        let spec = MeasureSpec::LazyRw {
            alpha: [0.3, 0.5, 0.8][i % 3],
        };
        let root = r.random_range(0..n);
        let src = src_field(&tree, TreeMode::Spt { root }, &spec, 1.0, None).unwrap();
        let orc = orc_field(&tree, &spec, None).unwrap();
        worst = worst.max(src.max_abs_diff(&orc).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "tree equivalence",
        worst <= 1e-9 && secs < 60.0,
        format!("200 trees, max |κ_SRC − κ_ORC| = {worst:.2e} (tol 1e-9), {secs:.1} s"),
    );
}

#[test]
fn criterion_02_tree_w1_oracle() {
    let _g = lock();
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = r.random_range(2..=40);
        let edges = random_tree_edges(&mut r, n, 0.1, 10.0);
        let tree = RootedTree::new(n, &edges, r.random_range(0..n)).unwrap();
        let mu = random_measure(&mut r, n, 12);
        let nu = random_measure(&mut r, n, 12);
        let cost = mu
            .support()
            .iter()
            .flat_map(|&a| {
                let row = tree_distances(n, &edges, a);
                nu.support().iter().map(move |&b| row[b]).collect::<Vec<_>>()
            })
            .collect();
        let problem = TransportProblem::new(mu.masses().to_vec(), nu.masses().to_vec(), cost).unwrap();
        let exact = exact_w1(&problem).unwrap();
        let s1 = sobolev_distance(&tree, &mu, &nu, 1.0).unwrap();
        worst = worst.max((exact - s1).abs());
    }
    verdict(
        2,
        "tree-W1 oracle",
        worst <= 1e-9,
        format!("500 instances, max |S_1 − W1_tree| = {worst:.2e} (tol 1e-9)"),
    );
}

#[test]
fn criterion_03_dirac_limit() {
    let _g = lock();
    let mut r = rng(103);
    let alphas = vec![0.5, 0.9, 0.99, 0.999, 1.0 - 1e-9];
    let sigmas = vec![1.0, 0.1, 0.01, 1e-3, 1e-4];
    let (mut terminal, mut stated_ok, mut strict_ok) = (0.0f64, true, true);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..20 {
        let n = r.random_range(20..=60);
        let extra = r.random_range(0..2 * n);
        let g = random_connected(&mut r, n, extra, 0.1, 10.0);
        let cloud = random_cloud(&mut r, n, 2);
        let mode = TreeMode::Spt { root: 0 };
        let lazy = dirac_sweep(
            &g,
            None,
            None,
            &DiracSchedule::Alpha { values: alphas.clone() },
            mode,
            1.0,
        )
        .unwrap();
        let gauss = dirac_sweep(
            &g,
            Some(&cloud),
            None,
            &DiracSchedule::Sigma {
                values: sigmas.clone(),
                k: 5,
                p_norm: Norm::Lp(2.0),
            },
            mode,
            1.0,
        )
        .unwrap();
        for rows in [&lazy, &gauss] {
            let last = rows.last().unwrap();
            terminal = terminal.max(last.max_abs_src).max(last.max_abs_orc);
        }
        for row in &lazy {
            let (env, strict) = (row.envelope.unwrap(), row.envelope_strict.unwrap());
            let top = row.max_abs_src.max(row.max_abs_orc);
            stated_ok &= top <= env * (1.0 + 1e-9);
            strict_ok &= top <= strict * (1.0 + 1e-9);
            if env > 0.0 {
                worst_ratio = worst_ratio.max(top / env);
            }
        }
    }
    verdict(
        3,
        "Dirac-limit flatness",
        terminal <= 1e-6 && stated_ok && strict_ok,
        format!(
            "20 graphs, terminal max |κ| = {terminal:.2e} (tol 1e-6); lazy envelope held: {stated_ok} \
             (max |κ|/envelope = {worst_ratio:.3}), strict envelope held: {strict_ok}"
        ),
    );
}

#[test]
fn criterion_04_root_dependence_bound() {
    let _g = lock();
    let spec = MeasureSpec::LazyRw { alpha: 0.5 };
    let (mut records, mut violations, mut worst) = (0, 0, 0.0f64);
    for seed in 0..50u64 {
        let rho = [0.1, 0.3, 0.5, 0.7, 0.9][seed as usize % 5];
        let g = sbm(100, 2, 0.2, rho, seed).unwrap().graph;
        for (a, b) in random_root_pairs(100, 10, seed).unwrap() {
            let rec = root_sensitivity(&g, &spec, 1.0, a, b, None).unwrap();
            records += 1;
            if !rec.within_bound() {
                violations += 1;
            }
            if let Some(ratio) = rec.ratio {
                worst = worst.max(ratio / rec.bound_constant);
            }
        }
    }
    verdict(
        4,
        "root-dependence bound",
        violations == 0,
        format!("{records} root pairs, {violations} violations, max ratio/C = {worst:.3e}"),
    );
}

fn sbm_ari(rho: f64, seed: u64) -> f64 {
    let data = sbm(200, 2, 0.15, rho, seed).unwrap();
    let config = FlowConfig::new(
        Method::Src {
            tree: TreeMode::Spt { root: 0 },
            p: 1.0,
        },
        MeasureSpec::LazyRw { alpha: 0.5 },
    );
    let state = run_flow(&data.graph, &config, None).unwrap();
    let sim = to_similarity(&state.weights, 1.0).unwrap();
    let edges: Vec<_> = data
        .graph
        .edges()
        .iter()
        .zip(&sim)
        .map(|(e, &s)| (e.u, e.v, s))
        .collect();
    let found = louvain(200, &edges, 1.0, seed).unwrap();
    ari(&found, &Partition::new(data.communities.as_ref().unwrap())).unwrap()
}

#[test]
fn criterion_05_sbm_recovery() {
    let _g = lock();
    let start = Instant::now();
    let easy: Vec<f64> = (0..10).map(|s| sbm_ari(0.1, s)).collect();
    let hard: Vec<f64> = (0..10).map(|s| sbm_ari(0.8, s)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        5,
        "SBM community recovery",
        mean(&easy) >= 0.9 && secs < 300.0,
        format!(
            "mean ARI at ρ=0.1 = {:.4} (min {:.4}, need >= 0.9); reported at ρ=0.8: {:.4}; {secs:.1} s",
            mean(&easy),
            easy.iter().copied().fold(1.0, f64::min),
            mean(&hard)
        ),
    );
}

#[test]
fn criterion_06_runtime_ordering() {
    let _g = lock();
    let g = sbm(200, 2, 0.15, 0.5, 0).unwrap().graph;
    let methods = [
        Method::Src {
            tree: TreeMode::Spt { root: 0 },
            p: 1.0,
        },
        Method::Orc,
    ];
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let records = pool
        .install(|| {
            bench(
                &[("sbm".into(), g)],
                &methods,
                &MeasureSpec::LazyRw { alpha: 0.5 },
                3,
                1,
            )
        })
        .unwrap();
    let (src, orc) = (records[0].median_ms, records[1].median_ms);
    let ratio = orc / src;
    verdict(
        6,
        "runtime ordering",
        ratio >= 2.0 && records.iter().all(|r| r.threads == 1),
        format!("median per-iteration ORC {orc:.1} ms vs SRC-SPT {src:.1} ms, ratio {ratio:.1} (need >= 2)"),
    );
}

#[test]
fn criterion_07_pruning_quality() {
    let _g = lock();
    let spec = MeasureSpec::LazyRw { alpha: 0.5 };
    let method = Method::Src {
        tree: TreeMode::Spt { root: 0 },
        p: 1.0,
    };
    let (mut tps, mut fps, mut counts) = (Vec::new(), Vec::new(), Vec::new());
    let (mut recalls, mut alt_tps) = (Vec::new(), Vec::new());
    for seed in 0..5 {
        let mut config = ManifoldConfig::new(ManifoldKind::ConcentricCircles, 1000, 0.07, seed);
        config.outer_radius = 1.4;
        let cloud = manifold(&config).unwrap();
        let knn = knn_graph_with_labels(&cloud, 10, ShortcutRule::default()).unwrap();
        let field = componentwise_curvature(&knn.graph, method, &spec, Some(&cloud)).unwrap();
        let report = manl_prune(
            &knn.graph,
            &field,
            ManlParams::new(0.75, 0.01),
            knn.shortcuts.as_deref(),
            Some(&cloud),
        )
        .unwrap();
        let labels = knn.shortcuts.as_ref().unwrap();
        let candidates = curvature_filter(&field, 0.75).unwrap();
        let caught = candidates.iter().filter(|&&e| labels[e]).count();
        recalls.push(caught as f64 / report.true_shortcuts.unwrap() as f64);
        let mut alt = ManlParams::new(0.75, 0.01);
        alt.detour = DetourGraph::WithoutCandidates;
        let alt_report = manl_prune(&knn.graph, &field, alt, Some(labels), Some(&cloud)).unwrap();
        alt_tps.push(alt_report.tp_rate.unwrap_or(0.0));
        counts.push(report.true_shortcuts.unwrap());
        tps.push(report.tp_rate.unwrap_or(0.0));
        fps.push(report.fp_rate.unwrap());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let enough = counts.iter().all(|&c| c >= 20);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    verdict(
        7,
        "pruning quality",
        enough && mean(&tps) >= 0.9 && mean(&fps) <= 0.1,
        format!(
            "shortcuts per seed {counts:?}; tp_rate [{}] mean {:.3} (need >= 0.9); fp_rate [{}] mean {:.4} \
             (need <= 0.1); reported: curvature-stage recall [{}], tp_rate with detours avoiding all candidates [{}]",
            fmt(&tps),
            mean(&tps),
            fmt(&fps),
            mean(&fps),
            fmt(&recalls),
            fmt(&alt_tps)
        ),
    );
}

#[test]
fn criterion_08_sbm_degree_statistics() {
    let _g = lock();
    let mean_degree = |rho: f64| {
        (0..10u64)
            .map(|s| sbm(500, 2, 0.15, rho, s).unwrap().graph.mean_degree())
            .sum::<f64>()
            / 10.0
    };
    let (low, high) = (mean_degree(0.1), mean_degree(0.9));
    verdict(
        8,
        "SBM generator statistics",
        (low - 41.1).abs() <= 3.0 && (high - 71.1).abs() <= 3.0,
        format!("mean degree {low:.2} at ρ=0.1 (target 41.1 ± 3), {high:.2} at ρ=0.9 (target 71.1 ± 3)"),
    );
}

#[test]
fn criterion_09_flow_fixed_point() {
    let _g = lock();
    let mut r = rng(109);
    let spec = MeasureSpec::LazyRw { alpha: 1.0 };
    let (mut drift, mut stops_ok) = (0.0f64, true);
    for i in 0..20 {
        let n = r.random_range(3..=40);
        let extra = r.random_range(0..2 * n);
        let g = random_connected(&mut r, n, extra, 0.1, 10.0);
        let method = if i % 2 == 0 {
            Method::Src {
                tree: TreeMode::Spt { root: 0 },
                p: 1.0,
            }
        } else {
            Method::Orc
        };
        let state = FlowState::new(&g, method, &spec, None).unwrap();
        let next = flow_step(&g, &state, method, &spec, None).unwrap();
        drift = state
            .weights
            .iter()
            .zip(&next.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(drift, f64::max);
        let run = run_flow(&g, &FlowConfig::new(method, spec), None).unwrap();
        stops_ok &= run.t == 1 && run.converged && run.delta_kappa_trace == [0.0];
    }
    verdict(
        9,
        "flow fixed point",
        drift <= 1e-12 && stops_ok,
        format!("20 graphs, max weight change {drift:.2e} (tol 1e-12), early stop at t=1 with Δκ=0: {stops_ok}"),
    );
}

#[test]
fn criterion_10_invariant_suites() {
    let _g = lock();
    let mut r = rng(110);
    let mut failures = Vec::new();

    let mut mass_err: f64 = 0.0;
    for _ in 0..50 {
        let n = r.random_range(12..=60);
        let extra = r.random_range(0..2 * n);
        let g = random_connected(&mut r, n, extra, 0.1, 10.0);
        let cloud = random_cloud(&mut r, n, 3);
        let specs = [
            MeasureSpec::Dirac,
            MeasureSpec::LazyRw { alpha: r.random() },
            MeasureSpec::GaussianKnn {
                sigma: r.random_range(0.01..2.0),
                k: 8,
                p_norm: Norm::Lp(2.0),
            },
        ];
        for spec in specs {
            for m in build_measures(&g, Some(&cloud), &spec).unwrap() {
                mass_err = mass_err.max((m.total_mass() - 1.0).abs());
            }
        }
    }
    if mass_err > 1e-12 {
        failures.push(format!("mass error {mass_err:.2e}"));
    }

    let mut axiom_failures = 0;
    let mut triples = 0;
    while triples < 1000 {
        let n = r.random_range(2..=30);
        let edges = random_tree_edges(&mut r, n, 0.1, 10.0);
        let tree = RootedTree::new(n, &edges, r.random_range(0..n)).unwrap();
        let p = [1.0, 1.5, 2.0, 3.0][triples % 4];
        for _ in 0..10 {
            let (a, b, c) = (
                random_measure(&mut r, n, 6),
                random_measure(&mut r, n, 6),
                random_measure(&mut r, n, 6),
            );
            let d = |x, y| sobolev_distance(&tree, x, y, p).unwrap();
            let ok = d(&a, &a) == 0.0
                && (d(&a, &b) - d(&b, &a)).abs() <= 1e-12
                && d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12
                && (a.total_variation(&b) <= 1e-9 || d(&a, &b) > 0.0);
            axiom_failures += usize::from(!ok);
            triples += 1;
        }
    }
    if axiom_failures > 0 {
        failures.push(format!("{axiom_failures} metric-axiom failures"));
    }

    let mut max_kappa = f64::NEG_INFINITY;
    let mut monotone_failures = 0;
    for _ in 0..20 {
        let n = r.random_range(5..=40);
        let extra = r.random_range(0..2 * n);
        let g = random_connected(&mut r, n, extra, 0.1, 10.0);
        let spec = MeasureSpec::LazyRw {
            alpha: r.random_range(0.0..0.9),
        };
        let fields = [
            src_field(&g, TreeMode::Spt { root: 0 }, &spec, 1.0, None).unwrap(),
            src_field(&g, TreeMode::Mst, &spec, 2.0, None).unwrap(),
            orc_field(&g, &spec, None).unwrap(),
        ];
        for f in &fields {
            max_kappa = f.kappa.iter().copied().fold(max_kappa, f64::max);
        }
        let deltas = [0.55, 0.65, 0.75, 0.85, 0.95];
        for w in deltas.windows(2) {
            let loose = curvature_filter(&fields[0], w[0]).unwrap();
            let strict = curvature_filter(&fields[0], w[1]).unwrap();
            let a = manl_prune(&g, &fields[0], ManlParams::new(w[0], 0.3), None, None).unwrap();
            let b = manl_prune(&g, &fields[0], ManlParams::new(w[1], 0.3), None, None).unwrap();
            let subset = |x: &[usize], y: &[usize]| x.iter().all(|e| y.contains(e));
            if !subset(&strict, &loose) || !subset(&b.removed_ids, &a.removed_ids) {
                monotone_failures += 1;
            }
        }
    }
    if max_kappa > 1.0 + 1e-12 {
        failures.push(format!("κ max {max_kappa}"));
    }
    if monotone_failures > 0 {
        failures.push(format!("{monotone_failures} pruning monotonicity failures"));
    }

    let mut ari_failures = 0;
    for _ in 0..200 {
        let n = r.random_range(2..=60);
        let k = r.random_range(1..=6);
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let renamed: Vec<String> = a.iter().map(|&x| format!("label-{}", 97 * x + 13)).collect();
        let base = ari(&Partition::new(&a), &Partition::new(&b)).unwrap();
        let moved = ari(&Partition::new(&renamed), &Partition::new(&b)).unwrap();
        let oracle = ari_by_pairs(&a, &b);
        if (base - moved).abs() > 1e-12 || (base - oracle).abs() > 1e-9 {
            ari_failures += 1;
        }
    }
    if ari_failures > 0 {
        failures.push(format!("{ari_failures} ARI invariance failures"));
    }

    verdict(
        10,
        "invariant suites",
        failures.is_empty(),
        format!(
            "mass error {mass_err:.1e}, 1000 metric triples, max κ {max_kappa:.4}, δ-monotonicity, ARI relabeling; failures: {}",
            if failures.is_empty() { "none".into() } else { failures.join("; ") }
        ),
    );
}
