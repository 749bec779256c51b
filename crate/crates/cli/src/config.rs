//! JSON config files supplying flag values.
//!
//! The file is an object whose keys are flag names (`p_intra` or `p-intra`).
//! Keys may sit at the top level or inside a section named after the
//! subcommand path (`"flow"`, `"gen sbm"`, `"diag dirac-sweep"`); section
//! values win over top-level ones. Values are appended to the command line
//! only for flags the user did not pass, so explicit flags always win.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::CommandFactory;
use serde_json::{Map, Value};

use crate::args::Cli;

/// Finds `--config <path>` or `--config=<path>` in raw arguments.
fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Subcommand names in the order they appear, following clap's tree.
fn subcommand_path(argv: &[OsString]) -> (clap::Command, Vec<String>) {
    let mut cmd = Cli::command();
    let mut path = Vec::new();
    for a in argv.iter().skip(1) {
        let s = a.to_string_lossy();
        if s.starts_with('-') {
            continue;
        }
        match cmd.find_subcommand(s.as_ref()) {
            Some(sub) => {
                path.push(s.to_string());
                cmd = sub.clone();
            }
            None => continue,
        }
    }
    (cmd, path)
}

fn flag_present(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_eq = format!("{flag}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&with_eq)
    })
}

fn scalar(value: &Value, key: &str) -> Result<String> {
    Ok(match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => bail!("config key `{key}`: unsupported value {other}"),
    })
}

/// Returns `argv` with config-supplied flags appended.
pub fn apply(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {}", Path::new(&path).display()))?;
    let root: Map<String, Value> = serde_json::from_str(&text).context("config must be a JSON object")?;
    let (cmd, path_names) = subcommand_path(&argv);
    let section = path_names.join(" ");

    let global = Cli::command();
    let known = |long: &str| {
        cmd.get_arguments().any(|a| a.get_long() == Some(long))
            || global
                .get_arguments()
                .any(|a| a.get_long() == Some(long) && a.is_global_set())
    };

    let mut merged: Vec<(String, Value)> = Vec::new();
    let section_map = root.get(&section).and_then(Value::as_object);
    for (k, v) in &root {
        if v.is_object() {
            continue;
        }
        merged.push((k.replace('_', "-"), v.clone()));
    }
    if let Some(map) = section_map {
        for (k, v) in map {
            let k = k.replace('_', "-");
            merged.retain(|(m, _)| *m != k);
            merged.push((k, v.clone()));
        }
    }

    let mut out = argv;
    for (long, value) in merged {
        if long == "config" || flag_present(&out, &long) {
            continue;
        }
        if !known(&long) {
            if section_map.is_some_and(|m| m.contains_key(&long) || m.contains_key(&long.replace('-', "_"))) {
                bail!("config key `{long}` is not a flag of `{section}`");
            }
            // top-level keys may target other subcommands
            continue;
        }
        let flag = OsString::from(format!("--{long}"));
        match &value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let joined = items
                    .iter()
                    .map(|v| scalar(v, &long))
                    .collect::<Result<Vec<_>>>()?
                    .join(",");
                out.push(flag);
                out.push(joined.into());
            }
            other => {
                out.push(flag);
                out.push(scalar(other, &long)?.into());
            }
        }
    }
    Ok(out)
}
