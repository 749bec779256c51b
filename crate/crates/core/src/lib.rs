//! Sobolev–Ricci curvature on weighted graphs.
//!
//! Curvature of an edge compares a transport distance between the
//! neighborhood measures of its endpoints with the distance between the
//! endpoints themselves. This crate evaluates that comparison two ways:
//!
//! * [`sobolev`]: Sobolev transport on a spanning tree, in closed form from
//!   cut masses (cheap, tree-dependent);
//! * [`orc`]: exact Ollivier–Ricci curvature via optimal transport under the
//!   graph metric (expensive, used as baseline and oracle).
//!
//! On top of the curvature fields sit a discrete Ricci flow ([`flow`]),
//! modularity clustering and partition scores ([`community`]), curvature
//! based shortcut pruning for kNN graphs ([`pruning`]), seeded generators
//! ([`generators`]), and consistency/benchmark instrumentation
//! ([`diagnostics`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod community;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod flow;
pub mod generators;
pub mod graph;
pub mod io;
pub mod measures;
pub mod orc;
pub mod paths;
pub mod points;
pub mod pruning;
pub mod sobolev;
pub mod spanning;
pub mod transport;
pub mod tree;

pub use error::{Error, Result};
pub use field::{CurvatureField, Method, TreeMode};
pub use graph::{Edge, EdgeId, NodeId, WeightedGraph};
pub use measures::{DiscreteMeasure, MeasureSpec};
pub use points::{Norm, PointCloud};
pub use tree::RootedTree;
