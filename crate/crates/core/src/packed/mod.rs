//! Constant-probe partial sums over a handful of elements.

mod layout;
mod small_array;

pub use layout::{required_field_bits, PackedLayout};
pub use small_array::{ArraySnapshot, PackedSmallArray, SelectAudit, SelectOutcome};

use thiserror::Error;

use crate::memory::MemoryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrayMode {
    /// Dietz rotation folds one `T` entry into `V` per update; no select.
    SumOnly,
    /// Global rebuild into runs every `B^4` updates; select supported.
    SelectEnabled,
}

/// How `select` finds the successor of `sigma` among the `V` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SuccessorStrategy {
    /// Binary search over the `V` cells, `O(lg B)` probes.
    #[default]
    BinarySearch,
    /// One probe of a packed copy of `V` compared against `sigma` in parallel.
    /// Falls back to binary search for epochs whose `V` does not fit the copy.
    BroadcastCompare,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PackedError {
    #[error("index {index} out of range for {len} elements")]
    Range { index: usize, len: usize },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("select argument {sigma} outside the current prefix-sum range")]
    Domain { sigma: i64 },
    #[error("select requires a select-enabled array")]
    Mode,
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Memory(#[from] MemoryError),
}
