use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sobolev-ricci"));
    cmd.env_remove("SOBOLEV_RICCI_OUT_DIR");
    cmd
}

fn run_ok(args: &[&str], out: &Path) -> Output {
    let output = bin().arg("--out-dir").arg(out).args(args).output().unwrap();
    assert!(
        output.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn kappas(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('u'))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn generators_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run_ok(
            &[
                "gen",
                "sbm",
                "--n",
                "60",
                "--p-intra",
                "0.3",
                "--rho",
                "0.2",
                "--seed",
                "7",
            ],
            out,
        );
        run_ok(
            &["gen", "manifold", "--kind", "moons", "--n", "120", "--seed", "7"],
            out,
        );
    }
    for name in ["labels.csv", "cloud.csv", "intrinsic.csv", "graph.csv", "shortcuts.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
    let manifest = json(&a.join("gen-sbm.manifest.json"));
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["parameters"]["n"], 60);
    assert!(manifest["git_describe"].is_string());
}

#[test]
fn path_graph_curvature_matches_between_methods() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("path.csv");
    fs::write(&graph, "u,v,length\n0,1,1\n1,2,1\n2,3,1\n").unwrap();
    let g = graph.to_str().unwrap();
    let src = dir.path().join("src");
    let orc = dir.path().join("orc");
    run_ok(&["curvature", "--graph", g, "--alpha", "0.5"], &src);
    run_ok(&["curvature", "--graph", g, "--alpha", "0.5", "--method", "orc"], &orc);
    let (ks, ko) = (kappas(&src.join("curvature.csv")), kappas(&orc.join("curvature.csv")));
    assert_eq!(ks.len(), 3);
    for (a, b) in ks.iter().zip(&ko) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // P4 with alpha = 1/2: end edges move mass 1/4 twice, the middle edge 1/4 + 1/2 + 1/4
    for (k, want) in ks.iter().zip([0.5, 0.0, 0.5]) {
        assert!((k - want).abs() < 1e-12, "{ks:?}");
    }
    let manifest = json(&src.join("curvature.manifest.json"));
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn invalid_method_is_a_usage_error() {
    let output = bin()
        .args(["curvature", "--graph", "x.csv", "--method", "bogus"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let output = bin().args(["flow"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .arg("--out-dir")
        .arg(dir.path())
        .args(["curvature", "--graph", "missing.csv"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("missing.csv"));
}

#[test]
fn config_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{"seed": 3, "gen sbm": {"n": 40, "p_intra": 0.5, "rho": 0.2}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    run_ok(&["--config", config.to_str().unwrap(), "gen", "sbm", "--n", "50"], &out);
    let manifest = json(&out.join("gen-sbm.manifest.json"));
    assert_eq!(manifest["parameters"]["n"], 50);
    assert_eq!(manifest["parameters"]["p_intra"], 0.5);
    assert_eq!(manifest["seed"], 3);

    fs::write(&config, r#"{"gen sbm": {"bogus": 1}}"#).unwrap();
    let output = bin()
        .arg("--out-dir")
        .arg(&out)
        .args(["--config", config.to_str().unwrap(), "gen", "sbm", "--n", "50"])
        .output()
        .unwrap();
    assert!(!output.status.success());
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env-out");
    let output = bin()
        .env("SOBOLEV_RICCI_OUT_DIR", &out)
        .args(["gen", "sbm", "--n", "20", "--p-intra", "0.6", "--rho", "0.5"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(out.join("graph.csv").exists());
}

#[test]
fn bridged_rings_are_pruned_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("rings.csv");
    let shortcuts = dir.path().join("shortcuts.csv");
    let mut edges = String::from("u,v,length\n");
    let mut flags = String::from("u,v,shortcut\n");
    for base in [0, 10] {
        for i in 0..10 {
            edges += &format!("{},{},1\n", base + i, base + (i + 1) % 10);
            flags += &format!("{},{},0\n", base + i, base + (i + 1) % 10);
        }
    }
    edges += "0,10,1\n";
    flags += "0,10,1\n";
    fs::write(&graph, edges).unwrap();
    fs::write(&shortcuts, flags).unwrap();
    let out = dir.path().join("out");
    run_ok(
        &[
            "prune",
            "--graph",
            graph.to_str().unwrap(),
            "--shortcuts",
            shortcuts.to_str().unwrap(),
        ],
        &out,
    );
    let report = json(&out.join("pruning.json"));
    assert_eq!(report["method"], "SRC-SPT-MANL");
    assert_eq!(report["removed_edges"], serde_json::json!([[0, 10]]));
    assert_eq!(report["tp_rate"], 1.0);
    assert_eq!(report["fp_rate"], 0.0);
    let removed = fs::read_to_string(out.join("removed.csv")).unwrap();
    assert!(removed.lines().any(|l| l == "0,10,1"));
}

#[test]
fn flow_then_cluster_recovers_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    run_ok(
        &[
            "gen",
            "sbm",
            "--n",
            "80",
            "--p-intra",
            "0.3",
            "--rho",
            "0.1",
            "--seed",
            "2",
        ],
        out,
    );
    let g = out.join("graph.csv");
    run_ok(&["flow", "--graph", g.to_str().unwrap(), "--iters", "5"], out);
    run_ok(
        &[
            "cluster",
            "--graph",
            g.to_str().unwrap(),
            "--weights",
            out.join("weights.csv").to_str().unwrap(),
            "--truth",
            out.join("labels.csv").to_str().unwrap(),
        ],
        out,
    );
    let trace = json(&out.join("trace.json"));
    assert_eq!(
        trace["records"].as_array().unwrap().len(),
        trace["iterations"].as_u64().unwrap() as usize
    );
    let cluster = json(&out.join("cluster.json"));
    assert!(cluster["ari"].as_f64().unwrap() > 0.9, "{cluster}");
}
