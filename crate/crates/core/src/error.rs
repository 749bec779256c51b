use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({u}, {v}) has non-positive length {length}")]
    NonPositiveLength { u: NodeId, v: NodeId, length: f64 },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("edge set is not a spanning tree: {0}")]
    NotATree(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge ({0}, {1})")]
    UnknownEdge(NodeId, NodeId),
    #[error("endpoints coincide at node {0}")]
    SameNode(NodeId),
    #[error("node {0} has no neighbors")]
    IsolatedNode(NodeId),
    #[error("invalid Gaussian bandwidth sigma = {0}")]
    DegenerateSigma(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("unbalanced transport problem: supply {supply}, demand {demand}")]
    Unbalanced { supply: f64, demand: f64 },
    #[error("transport solution failed the optimality certificate (gap {0:e})")]
    NotOptimal(f64),
    #[error("every edge weight collapsed to the floor")]
    AllEdgesCollapsed,
    #[error("ground-truth labels are missing")]
    MissingLabels,
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("could not draw a connected graph after {0} attempts")]
    CannotConnect(usize),
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
