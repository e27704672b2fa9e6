//! `cellprobe`: run traced experiments, dump workloads, analyze traces.
//!
//! Exit codes: 0 success, 2 usage error, 3 expected-answer mismatch.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cellprobe::bench::{
    csv_string, fit_log_curve, run_experiments, run_on_sequence, BenchError, CostRow, ExperimentConfig, Family, StructureId,
};
use cellprobe::hardgen::OpSequence;
use cellprobe::memory::{read_trace_jsonl, write_trace_jsonl};
use cellprobe::rng::SplitMix64;
use cellprobe::separator::{build_system_with_cap, find_separator, DEFAULT_PAIR_CAP};
use cellprobe::timetree::{build_time_tree, total_cross_reads};

const EXIT_USAGE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "cellprobe", version, about = "Cell-probe experiments on partial sums and dynamic connectivity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run structures on a workload under tracing and emit probe-count CSV.
    Bench(BenchArgs),
    /// Write a workload as JSONL.
    Gen(GenArgs),
    /// Build a time tree from a JSONL probe trace and emit per-node transfer CSV.
    Analyze(AnalyzeArgs),
    /// Build and verify a separator set system.
    SeparatorDemo(SeparatorArgs),
}

#[derive(Args, Clone)]
struct WorkloadArgs {
    /// random | bitrev | tradeoff | select-mix | permbox | permbox-bitrev
    #[arg(long)]
    family: Option<Family>,
    /// Array sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1024")]
    n: Vec<usize>,
    /// Update width: |delta| < 2^delta.
    #[arg(long, default_value_t = 8)]
    delta: u32,
    /// Ops for the random and select-mix families.
    #[arg(long, default_value_t = 4096)]
    ops: usize,
    /// Queries per tradeoff block.
    #[arg(long, default_value_t = 1)]
    tu: usize,
    /// Updates per tradeoff block.
    #[arg(long, default_value_t = 1)]
    tq: usize,
    /// Block count for tradeoff and permbox families.
    #[arg(long)]
    blocks: Option<usize>,
    /// Grid side for permbox families.
    #[arg(long, default_value_t = 16)]
    side: usize,
    /// Queries per block for permbox-bitrev.
    #[arg(long)]
    queries: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// naive | classic-fq | classic-fu | packed | packed-select | ett
    #[arg(long)]
    structure: StructureId,
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Cell width in bits.
    #[arg(long, default_value_t = 64)]
    b: u32,
    /// Tree branching factor (default: 2 for classic trees, widest fitting layout for packed).
    #[arg(long)]
    branching: Option<usize>,
    /// Time-tree arity.
    #[arg(long, default_value_t = 2)]
    arity: u64,
    /// Run a sequence written by `gen` instead of generating one.
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    /// CSV output path (default: stdout).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Probe trace output (JSONL); single n only.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Time-tree node CSV output; single n only.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Print a least-squares fit of amortized probes against lg n to stderr.
    #[arg(long)]
    fit: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Probe trace in JSONL.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = 2)]
    arity: u64,
    /// Operation count (default: last op index in the trace plus one).
    #[arg(long)]
    ops: Option<u64>,
    /// Time-tree CSV output path (default: stdout).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SeparatorArgs {
    #[arg(long, default_value_t = 2)]
    a: usize,
    #[arg(long = "b", default_value_t = 2)]
    bsize: usize,
    #[arg(long, default_value_t = 16)]
    u: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest number of (A, B) pairs to enumerate when verifying.
    #[arg(long, default_value_t = DEFAULT_PAIR_CAP as u64)]
    cap: u64,
}

enum Failure {
    Usage(String),
    Mismatch(String),
    Other(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(_) | BenchError::Gen(_) | BenchError::Degenerate(_) => Failure::Usage(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn configs(
    w: &WorkloadArgs,
    family: Family,
    structure: StructureId,
    b: u32,
    branching: Option<usize>,
    arity: u64,
) -> Vec<ExperimentConfig> {
    let ns = if family.is_graph() { vec![w.n.first().copied().unwrap_or(0)] } else { w.n.clone() };
    ns.into_iter()
        .map(|n| ExperimentConfig {
            structure,
            family,
            n,
            delta: w.delta,
            b,
            branching,
            ops: w.ops,
            t_u: w.tu,
            t_q: w.tq,
            blocks: w.blocks,
            side: w.side,
            queries: w.queries,
            seed: w.seed,
            arity,
        })
        .collect()
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => io::stdout().write_all(bytes),
    }
}

fn family_of(w: &WorkloadArgs) -> Result<Family, Failure> {
    w.family.ok_or_else(|| Failure::Usage("--family is required".into()))
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut results = Vec::new();
    if let Some(path) = &args.input {
        let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let seq = OpSequence::read_jsonl(BufReader::new(file)).map_err(|e| Failure::Usage(format!("bad sequence: {e}")))?;
        let cfg = ExperimentConfig {
            structure: args.structure,
            b: args.b,
            branching: args.branching,
            arity: args.arity,
            seed: seq.header.seed,
            ..Default::default()
        };
        results.push(run_on_sequence(&cfg, &seq)?);
    } else {
        let family = family_of(&args.workload)?;
        let cfgs = configs(&args.workload, family, args.structure, args.b, args.branching, args.arity);
        if cfgs.len() > 1 && (args.trace.is_some() || args.tree.is_some()) {
            return Err(Failure::Usage("--trace and --tree need a single --n".into()));
        }
        for cfg in &cfgs {
            cfg.validate()?;
        }
        for r in run_experiments(&cfgs) {
            results.push(r?);
        }
    }
    let mut rows: Vec<CostRow> = Vec::new();
    let mut mismatched = Vec::new();
    for res in &results {
        if res.mismatches > 0 {
            mismatched.push(format!("n={}: {} mismatches", res.row.n, res.mismatches));
        }
        rows.push(res.row.clone());
    }
    emit(args.csv.as_deref(), csv_string(&rows).as_bytes())?;
    if let Some(res) = results.first() {
        if let Some(path) = &args.trace {
            let mut buf = Vec::new();
            write_trace_jsonl(&res.trace, &mut buf)?;
            write_atomic(path, &buf)?;
        }
        if let Some(path) = &args.tree {
            let mut buf = Vec::new();
            res.tree.write_csv(&mut buf)?;
            write_atomic(path, &buf)?;
        }
    }
    if args.fit {
        let fit = fit_log_curve(&rows)?;
        eprintln!("fit: amortized = {:.6} * lg n + {:.6}, r2 = {:.6}", fit.slope, fit.intercept, fit.r2);
    }
    if !mismatched.is_empty() {
        return Err(Failure::Mismatch(mismatched.join("; ")));
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let family = family_of(&args.workload)?;
    let structure = if family.is_graph() { StructureId::Ett } else { StructureId::Naive };
    let cfgs = configs(&args.workload, family, structure, 64, None, 2);
    if cfgs.len() != 1 {
        return Err(Failure::Usage("gen takes a single --n".into()));
    }
    let seq = cfgs[0].sequence()?;
    emit(args.out.as_deref(), seq.to_jsonl().as_bytes())?;
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let file = File::open(&args.trace).map_err(|e| Failure::Usage(format!("{}: {e}", args.trace.display())))?;
    let trace = read_trace_jsonl(BufReader::new(file)).map_err(|e| Failure::Usage(format!("bad trace: {e}")))?;
    let ops = args.ops.unwrap_or_else(|| trace.iter().map(|e| e.op_index + 1).max().unwrap_or(1));
    let tree = build_time_tree(&trace, ops, args.arity).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut buf = Vec::new();
    tree.write_csv(&mut buf)?;
    emit(args.csv.as_deref(), &buf)?;
    eprintln!(
        "ops={ops} arity={} cross_reads={} transfer_total={} per_level={:?}",
        args.arity,
        total_cross_reads(&trace),
        tree.total_transfer(),
        tree.per_level_transfer()
    );
    Ok(())
}

fn separator_demo(args: SeparatorArgs) -> Result<(), Failure> {
    let sys = build_system_with_cap(args.a, args.bsize, args.u, args.seed, args.cap as u128)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    println!("a={} b={} u={} sets={} verified={} attempts={}", sys.a, sys.b, sys.universe, sys.len(), sys.verified, sys.attempts);
    println!("size constant C = {:.4}", sys.size_constant());
    let mut rng = SplitMix64::new(args.seed);
    let pick = rng.permutation(args.u);
    let (a_set, b_set) = (&pick[..args.a], &pick[args.a..args.a + args.bsize]);
    match find_separator(&sys, a_set, b_set) {
        Ok(i) => println!("A={a_set:?} B={b_set:?} separated by set {i}: {:?}", sys.members(i)),
        Err(e) => println!("A={a_set:?} B={b_set:?}: {e}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::Analyze(a) => analyze(a),
        Command::SeparatorDemo(a) => separator_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Mismatch(m)) => {
            eprintln!("expected-answer mismatch: {m}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
