//! Dynamic connectivity on forests: Euler tour trees, a BFS oracle, and
//! wrappers answering connectivity through "is the whole graph connected?"
//! and minimum spanning forest weight.

mod ett;
mod graph;
mod oracle;

pub use ett::{EulerTourForest, TourItem};
pub use graph::{msf_cost_unit, whole_graph_connected, DynamicGraph, GadgetGraph};
pub use oracle::GraphOracle;

use thiserror::Error;

use crate::hardgen::{Op, OpSequence};
use crate::memory::MemoryError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynConnError {
    #[error("vertex {vertex} out of range for {n} vertices")]
    Range { vertex: usize, n: usize },
    #[error("linking {u} and {v} would close a cycle")]
    Cycle { u: usize, v: usize },
    #[error("edge ({u}, {v}) is not present")]
    MissingEdge { u: usize, v: usize },
    #[error("edge ({u}, {v}) is already present")]
    DuplicateEdge { u: usize, v: usize },
    #[error("invalid state: {0}")]
    State(String),
    #[error(transparent)]
    Memory(#[from] MemoryError),
}

/// The operations a connectivity workload needs.
pub trait Connectivity {
    fn num_vertices(&self) -> usize;
    fn insert(&mut self, u: usize, v: usize) -> Result<(), DynConnError>;
    fn delete(&mut self, u: usize, v: usize) -> Result<(), DynConnError>;
    fn connected(&mut self, u: usize, v: usize) -> Result<bool, DynConnError>;
    fn components(&self) -> usize;
}

/// Runs a graph sequence and counts `Connected` answers differing from the
/// expected ones.
pub fn replay_graph<G: Connectivity>(g: &mut G, seq: &OpSequence) -> Result<usize, DynConnError> {
    let mut mismatches = 0;
    for op in &seq.ops {
        match *op {
            Op::Insert { u, v } => g.insert(u, v)?,
            Op::Delete { u, v } => g.delete(u, v)?,
            Op::Connected { u, v, expected } => mismatches += usize::from(g.connected(u, v)? != expected),
            _ => return Err(DynConnError::State("sums op in a graph sequence".into())),
        }
    }
    Ok(mismatches)
}

pub(crate) fn edge_key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}
