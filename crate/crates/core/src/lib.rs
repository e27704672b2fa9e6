//! Cell-probe instrumented partial sums and dynamic connectivity.
//!
//! Every data structure here keeps its state in a [`memory::CellMemory`].
//! Backed by a [`memory::TracedMemory`], a run records each cell probe with
//! the operation that issued it, and [`timetree`] turns such a trace into
//! per-node information-transfer counts.

pub mod bench;
pub mod dynconn;
pub mod hardgen;
pub mod memory;
pub mod packed;
pub mod rng;
pub mod separator;
pub mod sums;
pub mod timetree;
