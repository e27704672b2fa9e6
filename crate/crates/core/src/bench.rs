//! Experiment driver: run a structure on a generated workload under tracing
//! and summarize the probes as a CSV row plus a time tree.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::dynconn::{DynConnError, EulerTourForest};
use crate::hardgen::{
    bitrev_sequence, permbox_sequence, random_alternating, select_mix, tradeoff_blocks, BoxOrder, GenError, Op,
    OpSequence, PermBoxParams, QueryMode,
};
use crate::memory::{MemoryError, ProbeTrace, TracedMemory};
use crate::packed::{ArrayMode, SuccessorStrategy};
use crate::sums::{probe_cost_report, ClassicMode, ClassicTree, NaivePrefixOracle, PackedTree, PartialSums, SumsError};
use crate::timetree::{build_time_tree, total_cross_reads, TimeTree, TimeTreeError};

pub const CSV_SCHEMA_LINE: &str = "# schema=1";
pub const CSV_HEADER: &str =
    "n,b,delta,structure,family,total_reads,total_writes,amortized_per_op,transfer_total,per_level_transfer";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sums(#[from] SumsError),
    #[error(transparent)]
    DynConn(#[from] DynConnError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    TimeTree(#[from] TimeTreeError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error("transfer total {transfer} differs from {cross} cross reads")]
    Conservation { transfer: u64, cross: u64 },
    #[error("curve fit needs at least 3 distinct n, got {0}")]
    Degenerate(usize),
}

macro_rules! id_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = BenchError;

            fn from_str(s: &str) -> Result<Self, BenchError> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(BenchError::Config(format!(
                        "unknown {} '{s}', expected one of: {}",
                        stringify!($name).to_lowercase(),
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }
    };
}

id_enum!(StructureId {
    Naive => "naive",
    ClassicFq => "classic-fq",
    ClassicFu => "classic-fu",
    Packed => "packed",
    PackedSelect => "packed-select",
    Ett => "ett",
});

id_enum!(Family {
    Random => "random",
    Bitrev => "bitrev",
    Tradeoff => "tradeoff",
    SelectMix => "select-mix",
    Permbox => "permbox",
    PermboxBitrev => "permbox-bitrev",
});

impl Family {
    pub fn is_graph(self) -> bool {
        matches!(self, Family::Permbox | Family::PermboxBitrev)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub structure: StructureId,
    pub family: Family,
    /// Array length; graph families derive their size from `side`.
    pub n: usize,
    pub delta: u32,
    /// Cell width in bits.
    pub b: u32,
    /// Branching factor for tree structures; `None` picks the default.
    pub branching: Option<usize>,
    /// Op count for the random and select-mix families.
    pub ops: usize,
    pub t_u: usize,
    pub t_q: usize,
    /// Block count for tradeoff and permbox families.
    pub blocks: Option<usize>,
    pub side: usize,
    /// Queries per block for permbox-bitrev.
    pub queries: Option<usize>,
    pub seed: u64,
    pub arity: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            structure: StructureId::ClassicFu,
            family: Family::Random,
            n: 1024,
            delta: 8,
            b: 64,
            branching: None,
            ops: 4096,
            t_u: 1,
            t_q: 1,
            blocks: None,
            side: 16,
            queries: None,
            seed: 0,
            arity: 2,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let graph_structure = self.structure == StructureId::Ett;
        if graph_structure != self.family.is_graph() {
            return Err(BenchError::Config(format!(
                "structure {} cannot run family {}",
                self.structure, self.family
            )));
        }
        if self.structure == StructureId::PackedSelect && self.family != Family::SelectMix {
            return Err(BenchError::Config("packed-select runs the select-mix family".into()));
        }
        if self.family == Family::SelectMix
            && !matches!(self.structure, StructureId::PackedSelect | StructureId::Naive | StructureId::ClassicFq | StructureId::ClassicFu)
        {
            return Err(BenchError::Config(format!("{} does not support select", self.structure)));
        }
        if self.arity < 2 {
            return Err(BenchError::Config("arity must be at least 2".into()));
        }
        if !self.family.is_graph() && self.n == 0 {
            return Err(BenchError::Config("n must be positive".into()));
        }
        if !(1..=128).contains(&self.b) {
            return Err(BenchError::Config(format!("cell width {} outside 1..=128", self.b)));
        }
        Ok(())
    }

    /// The workload this config runs.
    pub fn sequence(&self) -> Result<OpSequence, BenchError> {
        self.validate()?;
        let seq = match self.family {
            Family::Random => random_alternating(self.ops, self.n, self.delta, self.seed)?,
            Family::Bitrev => bitrev_sequence(self.n, self.delta, self.seed)?,
            Family::Tradeoff => {
                let blocks = self.blocks.unwrap_or(self.ops / (self.t_u + self.t_q).max(1));
                tradeoff_blocks(blocks, self.t_u, self.t_q, self.n, self.delta, self.seed)?
            }
            Family::SelectMix => select_mix(self.ops, self.n, self.delta, self.seed)?,
            Family::Permbox | Family::PermboxBitrev => {
                let mut p = PermBoxParams::new(self.side, self.blocks.unwrap_or(self.side), self.seed);
                if self.family == Family::PermboxBitrev {
                    p.box_order = BoxOrder::Bitrev;
                    p.query_mode = QueryMode::Random;
                    p.queries_per_block = self.queries.unwrap_or(self.side);
                }
                permbox_sequence(&p)?
            }
        };
        Ok(seq)
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub n: usize,
    pub b: u32,
    pub delta: u32,
    pub structure: String,
    pub family: String,
    pub total_reads: u64,
    pub total_writes: u64,
    pub amortized_per_op: f64,
    pub transfer_total: u64,
    /// Root level first.
    pub per_level_transfer: Vec<u64>,
}

impl CostRow {
    pub fn to_csv_line(&self) -> String {
        let levels: Vec<String> = self.per_level_transfer.iter().map(u64::to_string).collect();
        format!(
            "{},{},{},{},{},{},{},{:.6},{},{}",
            self.n,
            self.b,
            self.delta,
            self.structure,
            self.family,
            self.total_reads,
            self.total_writes,
            self.amortized_per_op,
            self.transfer_total,
            levels.join(";")
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self, BenchError> {
        let bad = || BenchError::Config(format!("malformed CSV row: {line}"));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad());
        }
        let levels = if f[9].is_empty() {
            Vec::new()
        } else {
            f[9].split(';').map(|x| x.parse().map_err(|_| bad())).collect::<Result<_, _>>()?
        };
        Ok(Self {
            n: f[0].parse().map_err(|_| bad())?,
            b: f[1].parse().map_err(|_| bad())?,
            delta: f[2].parse().map_err(|_| bad())?,
            structure: f[3].into(),
            family: f[4].into(),
            total_reads: f[5].parse().map_err(|_| bad())?,
            total_writes: f[6].parse().map_err(|_| bad())?,
            amortized_per_op: f[7].parse().map_err(|_| bad())?,
            transfer_total: f[8].parse().map_err(|_| bad())?,
            per_level_transfer: levels,
        })
    }
}

pub fn write_csv<W: Write>(rows: &[CostRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_SCHEMA_LINE}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv_line())?;
    }
    Ok(())
}

pub fn csv_string(rows: &[CostRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ASCII output")
}

/// Rows of a CSV produced by [`write_csv`]; comment and header lines are skipped.
pub fn read_csv(text: &str) -> Result<Vec<CostRow>, BenchError> {
    text.lines()
        .filter(|l| !l.starts_with('#') && *l != CSV_HEADER && !l.trim().is_empty())
        .map(CostRow::from_csv_line)
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub row: CostRow,
    pub mismatches: usize,
    pub num_ops: usize,
    pub trace: ProbeTrace,
    pub tree: TimeTree,
}

/// Runs one experiment. Deterministic given the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, BenchError> {
    let seq = cfg.sequence()?;
    run_on_sequence(cfg, &seq)
}

/// Runs `cfg.structure` on a given sequence; size and update width come from
/// the sequence header, the workload fields of `cfg` are ignored.
pub fn run_on_sequence(cfg: &ExperimentConfig, seq: &OpSequence) -> Result<ExperimentResult, BenchError> {
    let graph_ops = seq.ops.iter().any(Op::is_graph_op);
    let sums_ops = seq.ops.iter().any(|op| !op.is_graph_op());
    if (cfg.structure == StructureId::Ett && sums_ops) || (cfg.structure != StructureId::Ett && graph_ops) {
        return Err(BenchError::Config(format!("structure {} cannot run family {}", cfg.structure, seq.header.family)));
    }
    let (n, delta) = (seq.header.n, seq.header.delta);
    let mem = TracedMemory::new(cfg.b)?;
    let (reads, writes, mismatches, trace) = match cfg.structure {
        StructureId::Naive => sums_run(NaivePrefixOracle::new(mem, n, delta)?, seq)?,
        StructureId::ClassicFq | StructureId::ClassicFu => {
            let mode = if cfg.structure == StructureId::ClassicFq { ClassicMode::FastQuery } else { ClassicMode::FastUpdate };
            sums_run(ClassicTree::new(mem, n, cfg.branching.unwrap_or(2), mode, delta)?, seq)?
        }
        StructureId::Packed | StructureId::PackedSelect => {
            let mode = if cfg.structure == StructureId::Packed { ArrayMode::SumOnly } else { ArrayMode::SelectEnabled };
            let strategy = SuccessorStrategy::default();
            let tree = match cfg.branching {
                Some(b) => PackedTree::with_branching(mem, n, b, delta, mode, strategy)?,
                None => PackedTree::new(mem, n, delta, mode, strategy)?,
            };
            sums_run(tree, seq)?
        }
        StructureId::Ett => graph_run(EulerTourForest::new(mem, n, cfg.seed)?, seq)?,
    };
    let num_ops = seq.len();
    let tree = build_time_tree(&trace, num_ops.max(1) as u64, cfg.arity)?;
    let transfer = tree.total_transfer();
    let cross = total_cross_reads(&trace);
    if transfer != cross {
        return Err(BenchError::Conservation { transfer, cross });
    }
    let row = CostRow {
        n: seq.header.n,
        b: cfg.b,
        delta: seq.header.delta,
        structure: cfg.structure.to_string(),
        family: seq.header.family.clone(),
        total_reads: reads,
        total_writes: writes,
        amortized_per_op: (reads + writes) as f64 / num_ops.max(1) as f64,
        transfer_total: transfer,
        per_level_transfer: tree.per_level_transfer(),
    };
    Ok(ExperimentResult { row, mismatches, num_ops, trace, tree })
}

/// Runs independent experiments on worker threads; results keep config order.
pub fn run_experiments(cfgs: &[ExperimentConfig]) -> Vec<Result<ExperimentResult, BenchError>> {
    cfgs.par_iter().map(run_experiment).collect()
}

type RunTotals = (u64, u64, usize, ProbeTrace);

fn sums_run<S: PartialSums<Memory = TracedMemory>>(mut s: S, seq: &OpSequence) -> Result<RunTotals, BenchError> {
    let table = probe_cost_report(&mut s, seq)?;
    Ok((table.total_reads, table.total_writes, table.mismatches, table.trace))
}

fn graph_run(mut f: EulerTourForest<TracedMemory>, seq: &OpSequence) -> Result<RunTotals, BenchError> {
    let mut mismatches = 0;
    for (i, op) in seq.ops.iter().enumerate() {
        f.memory_mut().set_current_op(i as u64)?;
        match *op {
            Op::Insert { u, v } => f.link(u, v)?,
            Op::Delete { u, v } => f.cut(u, v)?,
            Op::Connected { u, v, expected } => mismatches += usize::from(f.connected(u, v)? != expected),
            _ => return Err(BenchError::Config("sums op in a graph sequence".into())),
        }
    }
    let (reads, writes) = (f.memory().reads(), f.memory().writes());
    Ok((reads, writes, mismatches, f.memory_mut().take_trace()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares fit of `y` against `lg n`.
pub fn fit_log_points(points: &[(usize, f64)]) -> Result<LogFit, BenchError> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 || distinct[0] == 0 {
        return Err(BenchError::Degenerate(distinct.len()));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot <= f64::EPSILON * m { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LogFit { slope, intercept, r2 })
}

/// Fit of `amortized_per_op` against `lg n` over the rows.
pub fn fit_log_curve(rows: &[CostRow]) -> Result<LogFit, BenchError> {
    let pts: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.amortized_per_op)).collect();
    fit_log_points(&pts)
}
