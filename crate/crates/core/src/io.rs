//! Plain-text formats: edge lists, partitions, curvature fields, point
//! clouds, intrinsic coordinates, and per-edge shortcut labels.
//!
//! Readers accept `#` comments, blank lines, comma or whitespace separators,
//! and an optional header line.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{CurvatureField, FieldParams};
use crate::graph::{NodeId, WeightedGraph};
use crate::points::{ChartGeometry, Intrinsic, PointCloud};

fn tokens(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Non-empty, non-comment lines with 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("`{tok}` is not a number"),
    })
}

const HEADER_WORDS: [&str; 8] = ["u", "v", "source", "target", "from", "to", "node", "label"];

fn looks_like_header(toks: &[&str]) -> bool {
    toks.iter().any(|t| t.parse::<f64>().is_err())
        && toks.iter().all(|t| t.parse::<f64>().is_err())
        && toks
            .iter()
            .any(|t| HEADER_WORDS.contains(&t.to_ascii_lowercase().as_str()))
}

/// Original node labels of a file and the dense ids assigned to them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeIndex {
    names: Vec<String>,
    lookup: HashMap<String, NodeId>,
}

impl NodeIndex {
    /// Integer labels are ordered numerically; otherwise labels keep their
    /// order of first appearance.
    pub fn from_labels(seen: Vec<String>) -> Self {
        let mut unique: Vec<String> = Vec::new();
        let mut set = std::collections::HashSet::new();
        for s in seen {
            if set.insert(s.clone()) {
                unique.push(s);
            }
        }
        if unique.iter().all(|s| s.parse::<i64>().is_ok()) {
            unique.sort_by_key(|s| s.parse::<i64>().expect("checked integer"));
        }
        let lookup = unique.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { names: unique, lookup }
    }

    /// Labels `0..n`.
    pub fn identity(n: usize) -> Self {
        Self::from_labels((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.lookup.get(name).copied()
    }

    /// True when every label is its own dense id.
    pub fn is_identity(&self) -> bool {
        self.names.iter().enumerate().all(|(i, s)| *s == i.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct EdgeList {
    pub graph: WeightedGraph,
    pub index: NodeIndex,
}

/// Parses `u v [length]` lines. Repeated pairs (in either direction) with the
/// same length are merged; conflicting lengths are an error.
pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut raw: Vec<(usize, String, String, f64)> = Vec::new();
    for (k, (line, content)) in data_lines(text).enumerate() {
        let toks = tokens(content);
        if k == 0 && looks_like_header(&toks) {
            continue;
        }
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected `u v [length]`, found {} fields", toks.len()),
            });
        }
        let length = match toks.get(2) {
            Some(t) => parse_f64(t, line)?,
            None => 1.0,
        };
        raw.push((line, toks[0].to_string(), toks[1].to_string(), length));
    }
    let index = NodeIndex::from_labels(raw.iter().flat_map(|(_, a, b, _)| [a.clone(), b.clone()]).collect());
    let mut seen: HashMap<(NodeId, NodeId), f64> = HashMap::new();
    let mut edges = Vec::with_capacity(raw.len());
    for (line, a, b, length) in raw {
        let (u, v) = (index.id(&a).expect("indexed"), index.id(&b).expect("indexed"));
        let key = (u.min(v), u.max(v));
        match seen.get(&key) {
            Some(&prev) if prev == length => continue,
            Some(_) => {
                return Err(Error::Parse {
                    line,
                    msg: format!("edge {a}-{b} repeated with a different length"),
                })
            }
            None => {
                seen.insert(key, length);
                edges.push((u, v, length));
            }
        }
    }
    let graph = WeightedGraph::with_nodes(index.len(), &edges)?;
    Ok(EdgeList { graph, index })
}

pub fn write_edge_list(w: &mut impl Write, graph: &WeightedGraph, index: Option<&NodeIndex>) -> Result<()> {
    writeln!(w, "u,v,length")?;
    for e in graph.edges() {
        let (u, v) = names(index, e.u, e.v);
        writeln!(w, "{u},{v},{}", e.length)?;
    }
    Ok(())
}

fn name(index: Option<&NodeIndex>, x: NodeId) -> String {
    index.map_or_else(|| x.to_string(), |ix| ix.name(x).to_string())
}

fn names(index: Option<&NodeIndex>, u: NodeId, v: NodeId) -> (String, String) {
    (name(index, u), name(index, v))
}

fn resolve(index: Option<&NodeIndex>, label: &str, line: usize) -> Result<NodeId> {
    match index {
        Some(ix) => ix.id(label),
        None => label.parse::<NodeId>().ok(),
    }
    .ok_or_else(|| Error::Parse {
        line,
        msg: format!("unknown node `{label}`"),
    })
}

pub fn write_partition(w: &mut impl Write, labels: &[usize], index: Option<&NodeIndex>) -> Result<()> {
    writeln!(w, "node,label")?;
    for (x, l) in labels.iter().enumerate() {
        writeln!(w, "{},{l}", name(index, x))?;
    }
    Ok(())
}

/// Reads `node,label` rows into one label per node. Every node of the index
/// (or `0..n`) must be present exactly once.
pub fn parse_partition(text: &str, n: usize, index: Option<&NodeIndex>) -> Result<Vec<String>> {
    let mut labels: Vec<Option<String>> = vec![None; n];
    for (k, (line, content)) in data_lines(text).enumerate() {
        let toks = tokens(content);
        if k == 0 && looks_like_header(&toks) {
            continue;
        }
        if toks.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: "expected `node,label`".into(),
            });
        }
        let x = resolve(index, toks[0], line)?;
        if x >= n {
            return Err(Error::Parse {
                line,
                msg: format!("node `{}` outside the graph", toks[0]),
            });
        }
        if labels[x].replace(toks[1].to_string()).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("node `{}` labelled twice", toks[0]),
            });
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(x, l)| l.ok_or_else(|| Error::InvalidParameter(format!("node {} has no label", name(index, x)))))
        .collect()
}

/// `# {params}` line, `u,v,kappa` header, one row per edge.
pub fn write_field(
    w: &mut impl Write,
    graph: &WeightedGraph,
    field: &CurvatureField,
    index: Option<&NodeIndex>,
) -> Result<()> {
    field.check_covers(graph)?;
    writeln!(w, "# {}", serde_json::to_string(&field.params)?)?;
    writeln!(w, "u,v,kappa")?;
    for (e, k) in graph.edges().iter().zip(&field.kappa) {
        let (u, v) = names(index, e.u, e.v);
        writeln!(w, "{u},{v},{k}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub params: Option<FieldParams>,
    pub rows: Vec<(String, String, f64)>,
}

pub fn parse_field(text: &str) -> Result<FieldFile> {
    let params = text
        .lines()
        .find_map(|l| l.trim().strip_prefix('#').map(str::trim).filter(|s| s.starts_with('{')))
        .map(serde_json::from_str)
        .transpose()?;
    let mut rows = Vec::new();
    for (k, (line, content)) in data_lines(text).enumerate() {
        let toks = tokens(content);
        if k == 0 && toks.get(2).is_some_and(|t| t.parse::<f64>().is_err()) {
            continue;
        }
        if toks.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: "expected `u,v,kappa`".into(),
            });
        }
        rows.push((toks[0].to_string(), toks[1].to_string(), parse_f64(toks[2], line)?));
    }
    Ok(FieldFile { params, rows })
}

/// Per-edge values from `u,v,value` rows, aligned to the graph's edge ids.
pub fn align_edge_values(
    graph: &WeightedGraph,
    rows: &[(String, String, f64)],
    index: Option<&NodeIndex>,
) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN; graph.edge_count()];
    for (i, (a, b, val)) in rows.iter().enumerate() {
        let (u, v) = (resolve(index, a, i + 1)?, resolve(index, b, i + 1)?);
        let id = graph.edge_id(u, v).ok_or(Error::UnknownEdge(u, v))?;
        out[id] = *val;
    }
    if let Some(missing) = out.iter().position(|v| v.is_nan()) {
        let e = graph.edge(missing);
        return Err(Error::InvalidParameter(format!(
            "no value for edge {}-{}",
            name(index, e.u),
            name(index, e.v)
        )));
    }
    Ok(out)
}

pub fn write_cloud(w: &mut impl Write, cloud: &PointCloud) -> Result<()> {
    let header: Vec<String> = (0..cloud.dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in &cloud.points {
        let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn parse_rows(text: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (k, (line, content)) in data_lines(text).enumerate() {
        let toks = tokens(content);
        if k == 0 && toks.iter().all(|t| t.parse::<f64>().is_err()) {
            continue;
        }
        let row = toks.iter().map(|t| parse_f64(t, line)).collect::<Result<Vec<_>>>()?;
        rows.push((line, row));
    }
    Ok(rows)
}

/// One point per row; a non-numeric first row is taken as a header.
pub fn parse_cloud(text: &str) -> Result<PointCloud> {
    let rows = parse_rows(text)?;
    if let Some((line, _)) = rows.iter().find(|(_, r)| r.len() != rows[0].1.len()) {
        return Err(Error::Parse {
            line: *line,
            msg: "rows have different lengths".into(),
        });
    }
    PointCloud::new(rows.into_iter().map(|(_, r)| r).collect())
}

fn geometry_name(g: ChartGeometry) -> &'static str {
    match g {
        ChartGeometry::Euclidean => "euclidean",
        ChartGeometry::Circle => "circle",
        ChartGeometry::Spiral => "spiral",
    }
}

/// `# geometry: <name>` line, then `component,c0,c1,...` rows.
pub fn write_intrinsic(w: &mut impl Write, intrinsic: &Intrinsic) -> Result<()> {
    writeln!(w, "# geometry: {}", geometry_name(intrinsic.geometry))?;
    let dim = intrinsic.chart.first().map_or(0, Vec::len);
    let mut header = vec!["component".to_string()];
    header.extend((0..dim).map(|i| format!("c{i}")));
    writeln!(w, "{}", header.join(","))?;
    for (c, chart) in intrinsic.component.iter().zip(&intrinsic.chart) {
        let mut row = vec![c.to_string()];
        row.extend(chart.iter().map(|x| x.to_string()));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads intrinsic coordinates; geometry defaults to Euclidean when the
/// `# geometry:` line is absent.
pub fn parse_intrinsic(text: &str) -> Result<Intrinsic> {
    let mut geometry = ChartGeometry::Euclidean;
    for l in text.lines() {
        if let Some(rest) = l
            .trim()
            .strip_prefix('#')
            .and_then(|r| r.trim().strip_prefix("geometry:"))
        {
            geometry = match rest.trim() {
                "euclidean" => ChartGeometry::Euclidean,
                "circle" => ChartGeometry::Circle,
                "spiral" => ChartGeometry::Spiral,
                other => return Err(Error::UnknownKind(other.to_string())),
            };
        }
    }
    let mut component = Vec::new();
    let mut chart = Vec::new();
    for (line, row) in parse_rows(text)? {
        let Some((&c, rest)) = row.split_first() else { continue };
        if c < 0.0 || c.fract() != 0.0 {
            return Err(Error::Parse {
                line,
                msg: format!("component id {c} is not a nonnegative integer"),
            });
        }
        component.push(c as usize);
        chart.push(rest.to_vec());
    }
    Ok(Intrinsic {
        geometry,
        component,
        chart,
    })
}

pub fn write_edge_flags(
    w: &mut impl Write,
    graph: &WeightedGraph,
    flags: &[bool],
    column: &str,
    index: Option<&NodeIndex>,
) -> Result<()> {
    writeln!(w, "u,v,{column}")?;
    for (e, &f) in graph.edges().iter().zip(flags) {
        let (u, v) = names(index, e.u, e.v);
        writeln!(w, "{u},{v},{}", u8::from(f))?;
    }
    Ok(())
}

/// Reads `u,v,flag` rows (flag 0 or 1) aligned to edge ids.
pub fn parse_edge_flags(text: &str, graph: &WeightedGraph, index: Option<&NodeIndex>) -> Result<Vec<bool>> {
    let file = parse_field(text)?;
    for (a, b, v) in &file.rows {
        if *v != 0.0 && *v != 1.0 {
            return Err(Error::InvalidParameter(format!("flag for {a}-{b} must be 0 or 1")));
        }
    }
    Ok(align_edge_values(graph, &file.rows, index)?
        .into_iter()
        .map(|v| v == 1.0)
        .collect())
}

/// Per-edge weights `u,v,weight`.
pub fn write_edge_values(
    w: &mut impl Write,
    graph: &WeightedGraph,
    values: &[f64],
    column: &str,
    index: Option<&NodeIndex>,
) -> Result<()> {
    writeln!(w, "u,v,{column}")?;
    for (e, x) in graph.edges().iter().zip(values) {
        let (u, v) = names(index, e.u, e.v);
        writeln!(w, "{u},{v},{x}")?;
    }
    Ok(())
}
