//! Per-edge curvature values tagged with how they were computed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, WeightedGraph};
use crate::measures::MeasureSpec;

/// How the spanning tree for Sobolev computations is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tree", rename_all = "snake_case")]
pub enum TreeMode {
    Spt { root: usize },
    Mst,
    Random { seed: u64 },
}

impl TreeMode {
    pub fn label(&self) -> &'static str {
        match self {
            TreeMode::Spt { .. } => "SRC-SPT",
            TreeMode::Mst => "SRC-MST",
            TreeMode::Random { .. } => "SRC-RANDOM",
        }
    }
}

/// Curvature method: Sobolev on a tree with exponent `p`, or exact Ollivier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Src { tree: TreeMode, p: f64 },
    Orc,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Src { tree, .. } => tree.label(),
            Method::Orc => "ORC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub label: String,
    pub method: Method,
    pub measure: MeasureSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub params: FieldParams,
    /// Indexed by edge id of the graph the field was computed on.
    pub kappa: Vec<f64>,
}

impl CurvatureField {
    pub fn new(method: Method, measure: MeasureSpec, kappa: Vec<f64>) -> Self {
        Self {
            params: FieldParams {
                label: method.label().to_string(),
                method,
                measure,
            },
            kappa,
        }
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn get(&self, id: EdgeId) -> f64 {
        self.kappa[id]
    }

    pub fn max_abs(&self) -> f64 {
        self.kappa.iter().fold(0.0, |m, k| m.max(k.abs()))
    }

    /// `max_e |self_e - other_e|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self
            .kappa
            .iter()
            .zip(&other.kappa)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn check_covers(&self, graph: &WeightedGraph) -> Result<()> {
        if self.len() == graph.edge_count() {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                left: self.len(),
                right: graph.edge_count(),
            })
        }
    }
}
