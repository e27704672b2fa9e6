use super::{PartialSums, SumsError};
use crate::hardgen::{Op, OpSequence};
use crate::memory::{ProbeTrace, TracedMemory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCost {
    pub reads: u64,
    pub writes: u64,
}

/// Probe counts of one traced run.
#[derive(Debug, Clone, Default)]
pub struct CostTable {
    pub per_op: Vec<OpCost>,
    pub total_reads: u64,
    pub total_writes: u64,
    /// Outputs that differed from the sequence's expected answers.
    pub mismatches: usize,
    pub trace: ProbeTrace,
}

impl CostTable {
    pub fn amortized_reads(&self) -> f64 {
        self.total_reads as f64 / self.per_op.len().max(1) as f64
    }

    pub fn amortized_probes(&self) -> f64 {
        (self.total_reads + self.total_writes) as f64 / self.per_op.len().max(1) as f64
    }
}

/// Runs `seq` on a traced structure, op `i` tagged with index `i`, and
/// collects the probes. The memory's trace is drained into the table.
pub fn probe_cost_report<S>(s: &mut S, seq: &OpSequence) -> Result<CostTable, SumsError>
where
    S: PartialSums<Memory = TracedMemory>,
{
    let mut table = CostTable { per_op: Vec::with_capacity(seq.len()), ..Default::default() };
    s.memory_mut().take_trace();
    let base = s.memory().current_op();
    for (i, op) in seq.ops.iter().enumerate() {
        s.memory_mut().set_current_op(base + i as u64)?;
        let (r0, w0) = (s.memory().reads(), s.memory().writes());
        match *op {
            Op::Update { k, delta } => s.update(k, delta)?,
            Op::Sum { k, expected } => table.mismatches += usize::from(s.sum(k)? != expected),
            Op::Select { sigma, expected } => table.mismatches += usize::from(s.select(sigma)? != expected),
            _ => return Err(SumsError::Parameter("graph op in a sums sequence".into())),
        }
        let cost = OpCost { reads: s.memory().reads() - r0, writes: s.memory().writes() - w0 };
        table.total_reads += cost.reads;
        table.total_writes += cost.writes;
        table.per_op.push(cost);
    }
    table.trace = s.memory_mut().take_trace();
    Ok(table)
}
