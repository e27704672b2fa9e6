//! Simulated cell-probe memory.
//!
//! Memory is an array of `b`-bit cells addressed by integers below `2^b`.
//! Every structure in this crate keeps all of its state in a [`CellMemory`],
//! so running it on a [`TracedMemory`] yields the exact probe sequence the
//! cell-probe model charges for.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Word = u128;

/// Largest supported cell width.
pub const MAX_CELL_BITS: u32 = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemoryError {
    #[error("address {addr} out of range for {cell_bits}-bit cells")]
    AddressOutOfRange { addr: u64, cell_bits: u32 },
    #[error("value {value:#x} does not fit in a {cell_bits}-bit cell")]
    ValueTooWide { value: Word, cell_bits: u32 },
    #[error("operation index {requested} precedes current operation {current}")]
    OpOrder { current: u64, requested: u64 },
    #[error("cell width {0} outside 1..=128")]
    BadCellBits(u32),
    #[error("address space of {cell_bits}-bit cells exhausted")]
    OutOfCells { cell_bits: u32 },
}

/// A store of `b`-bit cells. Reads of cells never written return zero.
pub trait CellMemory {
    fn cell_bits(&self) -> u32;

    fn read(&mut self, addr: u64) -> Result<Word, MemoryError>;

    fn write(&mut self, addr: u64, value: Word) -> Result<(), MemoryError>;

    /// Reads a cell without charging a probe. For invariant checks only.
    fn peek(&self, addr: u64) -> Result<Word, MemoryError>;

    /// Reserves `cells` consecutive fresh (zero) cells and returns the first address.
    fn alloc(&mut self, cells: u64) -> Result<u64, MemoryError>;
}

pub fn cell_mask(cell_bits: u32) -> Word {
    if cell_bits >= 128 {
        Word::MAX
    } else {
        (1u128 << cell_bits) - 1
    }
}

fn check_bits(cell_bits: u32) -> Result<(), MemoryError> {
    if (1..=MAX_CELL_BITS).contains(&cell_bits) {
        Ok(())
    } else {
        Err(MemoryError::BadCellBits(cell_bits))
    }
}

fn check_addr(addr: u64, cell_bits: u32) -> Result<(), MemoryError> {
    if cell_bits < 64 && addr >> cell_bits != 0 {
        return Err(MemoryError::AddressOutOfRange { addr, cell_bits });
    }
    Ok(())
}

fn check_value(value: Word, cell_bits: u32) -> Result<(), MemoryError> {
    if value & !cell_mask(cell_bits) != 0 {
        return Err(MemoryError::ValueTooWide { value, cell_bits });
    }
    Ok(())
}

fn bump(next: &mut u64, cells: u64, cell_bits: u32) -> Result<u64, MemoryError> {
    let base = *next;
    let end = base.checked_add(cells).ok_or(MemoryError::OutOfCells { cell_bits })?;
    if cell_bits < 64 && end > 1u64 << cell_bits {
        return Err(MemoryError::OutOfCells { cell_bits });
    }
    *next = end;
    Ok(base)
}

/// Encodes a signed value as a two's-complement `cell_bits`-bit word.
pub fn encode_signed(value: i64, cell_bits: u32) -> Result<Word, MemoryError> {
    if cell_bits < 64 {
        let half = 1i64 << (cell_bits - 1);
        if value < -half || value >= half {
            return Err(MemoryError::ValueTooWide { value: value as i128 as Word, cell_bits });
        }
    }
    Ok((value as i128 as Word) & cell_mask(cell_bits))
}

/// Inverse of [`encode_signed`].
pub fn decode_signed(word: Word, cell_bits: u32) -> i64 {
    let shift = 128 - cell_bits;
    (((word << shift) as i128) >> shift) as i64
}

/// Untraced memory backed by a dense vector.
#[derive(Debug, Clone)]
pub struct PlainMemory {
    cell_bits: u32,
    cells: Vec<Word>,
    next_free: u64,
}

impl PlainMemory {
    pub fn new(cell_bits: u32) -> Result<Self, MemoryError> {
        check_bits(cell_bits)?;
        Ok(Self { cell_bits, cells: Vec::new(), next_free: 0 })
    }
}

impl CellMemory for PlainMemory {
    fn cell_bits(&self) -> u32 {
        self.cell_bits
    }

    fn read(&mut self, addr: u64) -> Result<Word, MemoryError> {
        self.peek(addr)
    }

    fn write(&mut self, addr: u64, value: Word) -> Result<(), MemoryError> {
        check_addr(addr, self.cell_bits)?;
        check_value(value, self.cell_bits)?;
        let i = addr as usize;
        if i >= self.cells.len() {
            self.cells.resize(i + 1, 0);
        }
        self.cells[i] = value;
        Ok(())
    }

    fn peek(&self, addr: u64) -> Result<Word, MemoryError> {
        check_addr(addr, self.cell_bits)?;
        Ok(self.cells.get(addr as usize).copied().unwrap_or(0))
    }

    fn alloc(&mut self, cells: u64) -> Result<u64, MemoryError> {
        bump(&mut self.next_free, cells, self.cell_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProbeKind {
    #[serde(rename = "r")]
    Read,
    #[serde(rename = "w")]
    Write,
}

/// One probe. `last_write_op` is the chronogram seen by a read; `None`
/// means the cell still held its initial value. Writes carry `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeEvent {
    pub op_index: u64,
    pub kind: ProbeKind,
    pub address: u64,
    pub last_write_op: Option<u64>,
}

impl ProbeEvent {
    /// A read of a cell last written by a strictly earlier operation.
    pub fn is_cross_read(&self) -> bool {
        self.kind == ProbeKind::Read && matches!(self.last_write_op, Some(w) if w < self.op_index)
    }
}

pub type ProbeTrace = Vec<ProbeEvent>;

#[derive(Serialize, Deserialize)]
struct EventLine {
    op: u64,
    kind: ProbeKind,
    addr: u64,
    lw: i64,
}

/// Writes one JSON object per event: `{"op":..,"kind":"r"|"w","addr":..,"lw":..}`,
/// with `lw = -1` for initial cells and for writes.
pub fn write_trace_jsonl<W: Write>(trace: &[ProbeEvent], mut out: W) -> io::Result<()> {
    for e in trace {
        let line = EventLine {
            op: e.op_index,
            kind: e.kind,
            addr: e.address,
            lw: e.last_write_op.map_or(-1, |w| w as i64),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl<R: BufRead>(input: R) -> io::Result<ProbeTrace> {
    let mut trace = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: EventLine = serde_json::from_str(&line)?;
        trace.push(ProbeEvent {
            op_index: e.op,
            kind: e.kind,
            address: e.addr,
            last_write_op: u64::try_from(e.lw).ok(),
        });
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    value: Word,
    last_write_op: Option<u64>,
}

/// Memory that records every probe together with the operation that issued it.
#[derive(Debug, Clone)]
pub struct TracedMemory {
    cell_bits: u32,
    cells: HashMap<u64, Cell>,
    current_op: u64,
    next_free: u64,
    trace: ProbeTrace,
    reads: u64,
    writes: u64,
}

impl TracedMemory {
    pub fn new(cell_bits: u32) -> Result<Self, MemoryError> {
        check_bits(cell_bits)?;
        Ok(Self {
            cell_bits,
            cells: HashMap::new(),
            current_op: 0,
            next_free: 0,
            trace: Vec::new(),
            reads: 0,
            writes: 0,
        })
    }

    pub fn current_op(&self) -> u64 {
        self.current_op
    }

    /// Attributes subsequent probes to `op_index`. Indices never decrease.
    pub fn set_current_op(&mut self, op_index: u64) -> Result<(), MemoryError> {
        if op_index < self.current_op {
            return Err(MemoryError::OpOrder { current: self.current_op, requested: op_index });
        }
        self.current_op = op_index;
        Ok(())
    }

    pub fn trace(&self) -> &[ProbeEvent] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> ProbeTrace {
        std::mem::take(&mut self.trace)
    }

    pub fn reads(&self) -> u64 {
        self.reads
    }

    pub fn writes(&self) -> u64 {
        self.writes
    }

    /// The chronogram of a cell: the op that last wrote it, `None` if never written.
    pub fn last_write_op(&self, addr: u64) -> Option<u64> {
        self.cells.get(&addr).and_then(|c| c.last_write_op)
    }
}

impl CellMemory for TracedMemory {
    fn cell_bits(&self) -> u32 {
        self.cell_bits
    }

    fn read(&mut self, addr: u64) -> Result<Word, MemoryError> {
        check_addr(addr, self.cell_bits)?;
        let cell = self.cells.get(&addr).copied();
        self.trace.push(ProbeEvent {
            op_index: self.current_op,
            kind: ProbeKind::Read,
            address: addr,
            last_write_op: cell.and_then(|c| c.last_write_op),
        });
        self.reads += 1;
        Ok(cell.map_or(0, |c| c.value))
    }

    fn write(&mut self, addr: u64, value: Word) -> Result<(), MemoryError> {
        check_addr(addr, self.cell_bits)?;
        check_value(value, self.cell_bits)?;
        self.cells.insert(addr, Cell { value, last_write_op: Some(self.current_op) });
        self.trace.push(ProbeEvent {
            op_index: self.current_op,
            kind: ProbeKind::Write,
            address: addr,
            last_write_op: None,
        });
        self.writes += 1;
        Ok(())
    }

    fn peek(&self, addr: u64) -> Result<Word, MemoryError> {
        check_addr(addr, self.cell_bits)?;
        Ok(self.cells.get(&addr).map_or(0, |c| c.value))
    }

    fn alloc(&mut self, cells: u64) -> Result<u64, MemoryError> {
        bump(&mut self.next_free, cells, self.cell_bits)
    }
}
