use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use sobolev_ricci::community::{ari, louvain, louvain_grid, modularity, Partition, RESOLUTION_GRID};
use sobolev_ricci::diagnostics::{
    bench, dirac_sweep, histogram_in_range, random_root_pairs, root_sensitivity, sample_edges, tree_robustness,
    value_range, DiracSchedule, Summary,
};
use sobolev_ricci::flow::{curvature, run_flow, to_similarity, FlowConfig};
use sobolev_ricci::generators::{knn_graph_with_labels, manifold, sbm, ManifoldConfig, ManifoldKind, ShortcutRule};
use sobolev_ricci::io::{self, EdgeList, NodeIndex};
use sobolev_ricci::pruning::{componentwise_curvature, curvature_only, distance_only, manl_prune, ManlParams};
use sobolev_ricci::{Method, NodeId, Norm, PointCloud, WeightedGraph};

use crate::args::*;
use crate::manifest::Run;

pub fn run(cli: Cli) -> Result<()> {
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Gen(GenCommand::Sbm(a)) => gen_sbm(&a, out),
        Command::Gen(GenCommand::Manifold(a)) => gen_manifold(&a, out),
        Command::Curvature(a) => curvature_cmd(&a, out),
        Command::Flow(a) => flow_cmd(&a, out),
        Command::Cluster(a) => cluster_cmd(&a, out),
        Command::Prune(a) => prune_cmd(&a, out),
        Command::Diag(DiagCommand::RootSensitivity(a)) => root_sensitivity_cmd(&a, out),
        Command::Diag(DiagCommand::DiracSweep(a)) => dirac_sweep_cmd(&a, out),
        Command::Diag(DiagCommand::Histogram(a)) => histogram_cmd(&a, out),
        Command::Diag(DiagCommand::TreeRobustness(a)) => tree_robustness_cmd(&a, out),
        Command::Bench(a) => bench_cmd(&a, out),
    }
}

fn report(run: Run) -> Result<()> {
    let path = run.finish()?;
    println!("{}", path.display());
    Ok(())
}

fn load_graph(run: &mut Run, path: &Path) -> Result<EdgeList> {
    let text = run.read_input(path)?;
    io::parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Reads a point cloud whose rows follow the graph's node order.
fn load_cloud(run: &mut Run, path: Option<&PathBuf>, nodes: usize) -> Result<Option<PointCloud>> {
    let Some(path) = path else { return Ok(None) };
    let text = run.read_input(path)?;
    let cloud = io::parse_cloud(&text).with_context(|| format!("parsing {}", path.display()))?;
    if cloud.len() != nodes {
        bail!(
            "{} has {} points but the graph has {nodes} nodes",
            path.display(),
            cloud.len()
        );
    }
    Ok(Some(cloud))
}

fn resolve_node(index: &NodeIndex, name: usize) -> Result<NodeId> {
    index
        .id(&name.to_string())
        .with_context(|| format!("node {name} is not in the graph"))
}

/// Options with the root translated from a node name to an internal id.
fn resolved(opts: &CurvatureOpts, index: &NodeIndex) -> Result<CurvatureOpts> {
    let mut opts = opts.clone();
    if opts.method == MethodArg::SrcSpt {
        opts.root = resolve_node(index, opts.root)?;
    }
    Ok(opts)
}

fn index_arg(index: &NodeIndex) -> Option<&NodeIndex> {
    (!index.is_identity()).then_some(index)
}

fn gen_sbm(a: &GenSbm, out: &Path) -> Result<()> {
    let mut run = Run::new("gen sbm", a, Some(a.seed), out)?;
    let data = sbm(a.n, a.k, a.p_intra, a.rho, a.seed)?;
    let communities = data.communities.expect("sbm carries communities");
    run.write_output("graph.csv", |w| io::write_edge_list(w, &data.graph, None))?;
    run.write_output("labels.csv", |w| io::write_partition(w, &communities, None))?;
    run.write_json(
        "dataset.json",
        &json!({
            "kind": "sbm",
            "nodes": data.graph.node_count(),
            "edges": data.graph.edge_count(),
            "mean_degree": data.graph.mean_degree(),
            "blocks": a.k,
        }),
    )?;
    report(run)
}

fn gen_manifold(a: &GenManifold, out: &Path) -> Result<()> {
    let mut run = Run::new("gen manifold", a, Some(a.seed), out)?;
    let kind = match a.kind {
        ManifoldArg::ConcentricCircles => ManifoldKind::ConcentricCircles,
        ManifoldArg::Moons => ManifoldKind::Moons,
        ManifoldArg::SCurve => ManifoldKind::SCurve,
        ManifoldArg::SwissRoll3d => ManifoldKind::SwissRoll3d,
    };
    let mut config = ManifoldConfig::new(kind, a.n, a.noise, a.seed);
    config.inner_radius = a.r1;
    config.outer_radius = a.r2;
    let cloud = manifold(&config)?;
    let knn = knn_graph_with_labels(
        &cloud,
        a.k,
        ShortcutRule {
            ratio: a.shortcut_ratio,
        },
    )?;
    let shortcuts = knn.shortcuts.expect("generated clouds carry intrinsic coordinates");
    let intrinsic = cloud
        .intrinsic
        .as_ref()
        .expect("generated clouds carry intrinsic coordinates");
    run.write_output("cloud.csv", |w| io::write_cloud(w, &cloud))?;
    run.write_output("intrinsic.csv", |w| io::write_intrinsic(w, intrinsic))?;
    run.write_output("graph.csv", |w| io::write_edge_list(w, &knn.graph, None))?;
    run.write_output("shortcuts.csv", |w| {
        io::write_edge_flags(w, &knn.graph, &shortcuts, "shortcut", None)
    })?;
    run.write_json(
        "dataset.json",
        &json!({
            "kind": kind.name(),
            "points": cloud.len(),
            "dim": cloud.dim,
            "edges": knn.graph.edge_count(),
            "shortcuts": shortcuts.iter().filter(|&&s| s).count(),
            "connected": knn.graph.is_connected(),
        }),
    )?;
    report(run)
}

fn curvature_cmd(a: &CurvatureCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("curvature", a, None, out)?;
    let list = load_graph(&mut run, &a.graph)?;
    let cloud = load_cloud(&mut run, a.cloud.as_ref(), list.graph.node_count())?;
    let opts = resolved(&a.opts, &list.index)?;
    let field = curvature(&list.graph, opts.method(), &opts.measure()?, cloud.as_ref())?;
    let index = index_arg(&list.index);
    run.write_output("curvature.csv", |w| io::write_field(w, &list.graph, &field, index))?;
    run.write_json("curvature_summary.json", &Summary::of(&field.kappa))?;
    report(run)
}

#[derive(Serialize)]
struct FlowTrace<'a> {
    iterations: usize,
    converged: bool,
    max_iters: usize,
    epsilon: f64,
    records: &'a [sobolev_ricci::flow::IterationRecord],
}

fn flow_cmd(a: &FlowCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("flow", a, None, out)?;
    let list = load_graph(&mut run, &a.graph)?;
    let cloud = load_cloud(&mut run, a.cloud.as_ref(), list.graph.node_count())?;
    let opts = resolved(&a.opts, &list.index)?;
    let mut config = FlowConfig::new(opts.method(), opts.measure()?);
    config.max_iters = a.iters;
    config.epsilon = a.eps;
    let state = run_flow(&list.graph, &config, cloud.as_ref())?;
    let index = index_arg(&list.index);
    run.write_output("weights.csv", |w| {
        io::write_edge_values(w, &list.graph, &state.weights, "weight", index)
    })?;
    run.write_output("final_curvature.csv", |w| {
        io::write_field(w, &list.graph, &state.last_field, index)
    })?;
    run.write_json(
        "trace.json",
        &FlowTrace {
            iterations: state.t,
            converged: state.converged,
            max_iters: a.iters,
            epsilon: a.eps,
            records: &state.records,
        },
    )?;
    report(run)
}

fn cluster_cmd(a: &ClusterCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("cluster", a, Some(a.seed), out)?;
    let list = load_graph(&mut run, &a.graph)?;
    let index = index_arg(&list.index);
    let graph = &list.graph;
    let weights = match &a.weights {
        Some(path) => {
            let text = run.read_input(path)?;
            let file = io::parse_field(&text).with_context(|| format!("parsing {}", path.display()))?;
            io::align_edge_values(graph, &file.rows, index)?
        }
        None => graph.lengths(),
    };
    let sim = to_similarity(&weights, a.beta)?;
    let edges: Vec<_> = graph.edges().iter().zip(&sim).map(|(e, &s)| (e.u, e.v, s)).collect();
    let n = graph.node_count();
    let (partition, resolution) = if a.grid {
        let best = louvain_grid(n, &edges, &RESOLUTION_GRID, a.seed)?;
        (best.partition, best.resolution)
    } else {
        (louvain(n, &edges, a.resolution, a.seed)?, a.resolution)
    };
    let q = modularity(n, &edges, &partition, 1.0)?;
    let score = match &a.truth {
        Some(path) => {
            let text = run.read_input(path)?;
            let labels = io::parse_partition(&text, n, index)?;
            Some(ari(&partition, &Partition::new(&labels))?)
        }
        None => None,
    };
    run.write_output("partition.csv", |w| io::write_partition(w, partition.labels(), index))?;
    run.write_json(
        "cluster.json",
        &json!({
            "communities": partition.community_count(),
            "resolution": resolution,
            "modularity": q,
            "ari": score,
        }),
    )?;
    report(run)
}

fn prune_cmd(a: &PruneCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("prune", a, None, out)?;
    let (graph, index, shortcuts, cloud) = match (&a.cloud, &a.graph) {
        (Some(path), _) => {
            let text = run.read_input(path)?;
            let mut cloud = io::parse_cloud(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(ipath) = &a.intrinsic {
                let text = run.read_input(ipath)?;
                let intrinsic = io::parse_intrinsic(&text).with_context(|| format!("parsing {}", ipath.display()))?;
                if intrinsic.component.len() != cloud.len() {
                    bail!("{} does not match the cloud's point count", ipath.display());
                }
                cloud.intrinsic = Some(intrinsic);
            }
            let knn = knn_graph_with_labels(
                &cloud,
                a.k,
                ShortcutRule {
                    ratio: a.shortcut_ratio,
                },
            )?;
            run.write_output("graph.csv", |w| io::write_edge_list(w, &knn.graph, None))?;
            (knn.graph, NodeIndex::identity(cloud.len()), knn.shortcuts, Some(cloud))
        }
        (None, Some(path)) => {
            let list = load_graph(&mut run, path)?;
            let shortcuts = match &a.shortcuts {
                Some(spath) => {
                    let text = run.read_input(spath)?;
                    Some(io::parse_edge_flags(&text, &list.graph, index_arg(&list.index))?)
                }
                None => None,
            };
            (list.graph, list.index, shortcuts, None)
        }
        (None, None) => bail!("either --cloud or --graph is required"),
    };
    let opts = resolved(&a.opts, &index)?;
    let field = || -> Result<_> {
        Ok(componentwise_curvature(
            &graph,
            opts.method(),
            &opts.measure()?,
            cloud.as_ref(),
        )?)
    };
    let labels = shortcuts.as_deref();
    let report_data = match a.mode {
        PruneMode::Manl => {
            let mut params = ManlParams::new(a.delta, a.lambda);
            params.rounds = a.rounds;
            params.detour = a.detour.into();
            manl_prune(&graph, &field()?, params, labels, cloud.as_ref())?
        }
        PruneMode::CurvatureOnly => curvature_only(&graph, &field()?, a.delta, labels)?,
        PruneMode::DistanceOnly => distance_only(&graph, a.quantile, labels)?,
    };
    let index = index_arg(&index);
    let mut flags = vec![false; graph.edge_count()];
    for &e in &report_data.removed_ids {
        flags[e] = true;
    }
    run.write_output("removed.csv", |w| {
        io::write_edge_flags(w, &graph, &flags, "removed", index)
    })?;
    run.write_json("pruning.json", &report_data)?;
    report(run)
}

fn root_sensitivity_cmd(a: &RootSensitivityCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("diag root-sensitivity", a, Some(a.seed), out)?;
    let list = load_graph(&mut run, &a.graph)?;
    let cloud = load_cloud(&mut run, a.cloud.as_ref(), list.graph.node_count())?;
    let spec = a.opts.measure()?;
    let records = random_root_pairs(list.graph.node_count(), a.pairs, a.seed)?
        .into_iter()
        .map(|(r, r2)| root_sensitivity(&list.graph, &spec, a.opts.p, r, r2, cloud.as_ref()))
        .collect::<sobolev_ricci::Result<Vec<_>>>()?;
    let within = records.iter().filter(|r| r.within_bound()).count();
    run.write_json(
        "root_sensitivity.json",
        &json!({ "pairs": records.len(), "within_bound": within, "records": records }),
    )?;
    report(run)
}

fn dirac_sweep_cmd(a: &DiracSweepCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("diag dirac-sweep", a, Some(a.seed), out)?;
    let list = load_graph(&mut run, &a.graph)?;
    let cloud = load_cloud(&mut run, a.cloud.as_ref(), list.graph.node_count())?;
    let opts = resolved(&a.opts, &list.index)?;
    let schedule = match a.family {
        FamilyArg::Alpha => DiracSchedule::Alpha {
            values: a.values.clone(),
        },
        FamilyArg::Sigma => DiracSchedule::Sigma {
            values: a.values.clone(),
            k: a.opts.k_nn,
            p_norm: Norm::parse(&a.opts.p_norm)?,
        },
    };
    let sample = a
        .sample
        .map(|count| sample_edges(list.graph.edge_count(), count, a.seed));
    let rows = dirac_sweep(
        &list.graph,
        cloud.as_ref(),
        sample.as_deref(),
        &schedule,
        opts.tree_mode(),
        a.opts.p,
    )?;
    run.write_output("dirac_sweep.csv", |w| {
        writeln!(w, "parameter,max_abs_src,max_abs_orc,envelope,envelope_strict")?;
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.parameter,
                r.max_abs_src,
                r.max_abs_orc,
                opt(r.envelope),
                opt(r.envelope_strict)
            )?;
        }
        Ok(())
    })?;
    run.write_json("dirac_sweep.json", &json!({ "schedule": schedule, "rows": rows }))?;
    report(run)
}

fn histogram_cmd(a: &HistogramCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("diag histogram", a, None, out)?;
    let text = run.read_input(&a.field)?;
    let file = io::parse_field(&text).with_context(|| format!("parsing {}", a.field.display()))?;
    let values: Vec<f64> = file.rows.iter().map(|r| r.2).collect();
    let (lo, hi) = match a.range.as_deref() {
        Some([lo, hi]) => (*lo, *hi),
        Some(_) => bail!("--range takes exactly two values"),
        None => value_range(&values).context("field file has no rows")?,
    };
    let hist = histogram_in_range(&values, a.bins, lo, hi)?;
    run.write_json(
        "histogram.json",
        &json!({
            "params": file.params,
            "summary": Summary::of(&values),
            "histogram": hist,
        }),
    )?;
    report(run)
}

fn tree_robustness_cmd(a: &TreeRobustnessCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("diag tree-robustness", a, None, out)?;
    let list = load_graph(&mut run, &a.graph)?;
    let cloud = load_cloud(&mut run, a.cloud.as_ref(), list.graph.node_count())?;
    let root = resolve_node(&list.index, a.opts.root)?;
    let rows = tree_robustness(
        &list.graph,
        &a.opts.measure()?,
        a.opts.p,
        root,
        &a.seeds,
        a.bins,
        cloud.as_ref(),
    )?;
    run.write_json("tree_robustness.json", &rows)?;
    report(run)
}

fn bench_cmd(a: &BenchCmd, out: &Path) -> Result<()> {
    let mut run = Run::new("bench", a, Some(a.seed), out)?;
    let mut graphs: Vec<(String, WeightedGraph)> = Vec::new();
    for path in &a.graph {
        let list = load_graph(&mut run, path)?;
        graphs.push((path.display().to_string(), list.graph));
    }
    if graphs.is_empty() {
        let data = sbm(a.sbm_n, 2, a.p_intra, a.rho, a.seed)?;
        graphs.push((format!("sbm(n={}, rho={})", a.sbm_n, a.rho), data.graph));
    }
    let methods: Vec<Method> = a
        .methods
        .iter()
        .map(|&m| {
            CurvatureOpts {
                method: m,
                ..a.opts.clone()
            }
            .method()
        })
        .collect();
    let records = bench(&graphs, &methods, &a.opts.measure()?, a.reps, a.iters)?;
    run.write_output("bench.csv", |w| {
        writeln!(
            w,
            "graph,method,n,m,mean_degree,median_ms,iqr_ms,repetitions,iterations,threads"
        )?;
        for r in &records {
            writeln!(
                w,
                "\"{}\",{},{},{},{},{},{},{},{},{}",
                r.graph,
                r.method,
                r.n,
                r.m,
                r.mean_degree,
                r.median_ms,
                r.iqr_ms,
                r.repetitions,
                r.iterations,
                r.threads
            )?;
        }
        Ok(())
    })?;
    run.write_json("bench.json", &records)?;
    report(run)
}
