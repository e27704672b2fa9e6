//! Workload generators for the hard instance families, each op carrying its
//! expected answer.
//!
//! Sequences serialize as JSONL: a header object on the first line, then one
//! op per line tagged by `"op"`.

mod perm;
mod permbox;
mod sums;

pub use perm::{bitrev_perm, Permutation};
pub use permbox::{
    compose_prefix, permbox_run, permbox_sequence, BoxOrder, PermBoxInstance, PermBoxParams, PermBoxRun,
    QueryMode,
};
pub use sums::{
    bitrev_sequence, random_alternating, replay_sums, select_mix, sum_accesses, tradeoff_blocks, Fenwick,
};

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Update { k: usize, delta: i64 },
    Sum { k: usize, expected: i64 },
    Select { sigma: i64, expected: usize },
    Insert { u: usize, v: usize },
    Delete { u: usize, v: usize },
    Connected { u: usize, v: usize, expected: bool },
}

impl Op {
    pub fn is_graph_op(&self) -> bool {
        matches!(self, Op::Insert { .. } | Op::Delete { .. } | Op::Connected { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceHeader {
    pub family: String,
    /// Array length for sums families, vertex count for graph families.
    pub n: usize,
    pub delta: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpSequence {
    pub header: SequenceHeader,
    pub ops: Vec<Op>,
}

impl OpSequence {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for op in &self.ops {
            serde_json::to_writer(&mut out, op)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<Self> {
        let mut lines = input.lines();
        let first = lines
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "missing header line"))??;
        let header: SequenceHeader = serde_json::from_str(&first)?;
        let mut ops = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            ops.push(serde_json::from_str(&line)?);
        }
        Ok(Self { header, ops })
    }
}
