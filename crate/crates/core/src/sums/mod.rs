//! Partial sums over `n` elements: `update(k, delta)` adds to `A[k]`,
//! `sum(k)` returns `A[0] + ... + A[k]`, and `select(sigma)` returns the
//! smallest `i` with `sum(i) >= sigma`.

mod classic;
mod cost;
mod naive;
mod packed_tree;

pub use classic::{ClassicMode, ClassicTree};
pub use cost::{probe_cost_report, CostTable, OpCost};
pub use naive::NaivePrefixOracle;
pub use packed_tree::PackedTree;

use thiserror::Error;

use crate::memory::{CellMemory, MemoryError};
use crate::packed::PackedError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SumsError {
    #[error("index {index} out of range for {len} elements")]
    Range { index: usize, len: usize },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("select argument {sigma} outside 1..=total")]
    Domain { sigma: i64 },
    #[error("structure was built without select support")]
    Mode,
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error(transparent)]
    Memory(#[from] MemoryError),
}

impl From<PackedError> for SumsError {
    fn from(e: PackedError) -> Self {
        match e {
            PackedError::Range { index, len } => SumsError::Range { index, len },
            PackedError::Encoding(s) => SumsError::Encoding(s),
            PackedError::Domain { sigma } => SumsError::Domain { sigma },
            PackedError::Mode => SumsError::Mode,
            PackedError::Layout(s) => SumsError::Parameter(s),
            PackedError::Memory(m) => SumsError::Memory(m),
        }
    }
}

pub trait PartialSums {
    type Memory: CellMemory;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bits of the update argument: `|delta| < 2^delta_bits`.
    fn delta_bits(&self) -> u32;

    fn update(&mut self, k: usize, delta: i64) -> Result<(), SumsError>;

    fn sum(&mut self, k: usize) -> Result<i64, SumsError>;

    fn select(&mut self, sigma: i64) -> Result<usize, SumsError>;

    fn memory(&self) -> &Self::Memory;

    fn memory_mut(&mut self) -> &mut Self::Memory;
}

pub(crate) fn check_index(k: usize, n: usize) -> Result<(), SumsError> {
    if k >= n {
        return Err(SumsError::Range { index: k, len: n });
    }
    Ok(())
}

pub(crate) fn check_delta(delta: i64, bits: u32) -> Result<(), SumsError> {
    if delta.unsigned_abs() >= 1u64 << bits {
        return Err(SumsError::Encoding(format!("|{delta}| >= 2^{bits}")));
    }
    Ok(())
}

pub(crate) fn check_delta_bits(bits: u32) -> Result<(), SumsError> {
    if !(1..=62).contains(&bits) {
        return Err(SumsError::Parameter(format!("delta width {bits} outside 1..=62")));
    }
    Ok(())
}

/// Digits of `k` in base `b`, most significant first, exactly `height` of them.
pub(crate) fn digits(mut k: usize, b: usize, height: usize) -> Vec<usize> {
    let mut d = vec![0; height];
    for slot in d.iter_mut().rev() {
        *slot = k % b;
        k /= b;
    }
    d
}

/// Smallest `h >= 1` with `b^h >= n`.
pub(crate) fn height_for(n: usize, b: usize) -> usize {
    let mut h = 1;
    let mut cap = b;
    while cap < n {
        cap *= b;
        h += 1;
    }
    h
}
