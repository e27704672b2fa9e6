//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero on any failure.

use std::collections::{HashMap, HashSet};
use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use cellprobe::bench::{csv_string, fit_log_points, run_experiment, run_experiments, ExperimentConfig, Family, StructureId};
use cellprobe::dynconn::{
    msf_cost_unit, whole_graph_connected, Connectivity, DynamicGraph, EulerTourForest, GadgetGraph, GraphOracle,
};
use cellprobe::hardgen::{
    bitrev_sequence, compose_prefix, permbox_run, random_alternating, replay_sums, select_mix, sum_accesses, BoxOrder,
    Op, PermBoxInstance, PermBoxParams, Permutation, QueryMode,
};
use cellprobe::memory::{CellMemory, PlainMemory, TracedMemory};
use cellprobe::packed::{ArrayMode, PackedLayout, SuccessorStrategy};
use cellprobe::rng::SplitMix64;
use cellprobe::separator::{build_system, build_system_with_cap};
use cellprobe::sums::{ClassicMode, ClassicTree, NaivePrefixOracle, PackedTree, PartialSums};
use cellprobe::timetree::{binary_tree_interleaving, build_time_tree, interleaving, total_cross_reads};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_oracle_equivalence() -> Outcome {
    const OPS: usize = 100_000;
    let mut cases = Vec::new();
    for n in [1usize << 8, 1 << 12] {
        for delta in [1u32, 4, 8] {
            cases.push((n, delta));
        }
    }
    let results: Vec<Result<usize, String>> = cases
        .par_iter()
        .map(|&(n, delta)| {
            let seq = random_alternating(OPS, n, delta, 0xA11CE ^ n as u64 ^ delta as u64).map_err(|e| e.to_string())?;
            let mut naive = NaivePrefixOracle::plain(n, delta);
            let m = replay_sums(&mut naive, &seq).map_err(|e| e.to_string())?;
            ensure(m == 0, || format!("generator disagrees with naive oracle at n={n} delta={delta}"))?;
            let mut checked = 0;
            for b in [64u32, 128] {
                let mut runs: Vec<(String, usize)> = Vec::new();
                for mode in [ClassicMode::FastQuery, ClassicMode::FastUpdate] {
                    for branching in [2usize, 8] {
                        let mut t = ClassicTree::new(PlainMemory::new(b).unwrap(), n, branching, mode, delta)
                            .map_err(|e| e.to_string())?;
                        let m = replay_sums(&mut t, &seq).map_err(|e| e.to_string())?;
                        runs.push((format!("{mode:?} B={branching}"), m));
                    }
                }
                if let Ok(mut t) = PackedTree::new(
                    PlainMemory::new(b).unwrap(),
                    n,
                    delta,
                    ArrayMode::SumOnly,
                    SuccessorStrategy::default(),
                ) {
                    let m = replay_sums(&mut t, &seq).map_err(|e| e.to_string())?;
                    runs.push((format!("packed B={}", t.branching()), m));
                }
                for (name, m) in runs {
                    ensure(m == 0, || format!("{name} b={b} n={n} delta={delta}: {m} mismatches"))?;
                    checked += 1;
                }
            }
            Ok(checked)
        })
        .collect();
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{total} structure configs x {OPS} ops, zero mismatches"))
}

fn c2_word_parallel() -> Outcome {
    let mut calls = 0u64;
    for word_bits in [64u32, 128] {
        for fields in 1..=5usize {
            for field_bits in 3..=6u32 {
                let l = PackedLayout::new(fields, field_bits, word_bits).map_err(|e| e.to_string())?;
                let (lo, hi) = (l.field_min(), l.field_max());
                let span = (hi - lo + 1) as u64;
                let total = span.pow(fields as u32);
                // every base word when small enough, else a fixed sample plus the extremes
                let bases: Vec<Vec<i64>> = if total <= 40_000 {
                    (0..total)
                        .map(|mut c| {
                            (0..fields)
                                .map(|_| {
                                    let x = lo + (c % span) as i64;
                                    c /= span;
                                    x
                                })
                                .collect()
                        })
                        .collect()
                } else {
                    let mut rng = SplitMix64::new(fields as u64 * 97 + field_bits as u64);
                    let mut v: Vec<Vec<i64>> =
                        (0..4000).map(|_| (0..fields).map(|_| rng.range_inclusive(lo, hi)).collect()).collect();
                    v.push(vec![lo; fields]);
                    v.push(vec![hi; fields]);
                    v.push(vec![0; fields]);
                    v
                };
                for base in &bases {
                    let w = l.pack(base).map_err(|e| e.to_string())?;
                    for k in 0..fields {
                        for v in -hi..=hi {
                            let expect: Vec<i64> =
                                base.iter().enumerate().map(|(i, &x)| if i >= k { x + v } else { x }).collect();
                            if expect.iter().any(|&x| x < lo || x > hi) {
                                continue;
                            }
                            let out = l.broadcast_suffix_add(w, k, v).map_err(|e| e.to_string())?;
                            ensure(l.unpack(out) == expect, || {
                                format!("w={word_bits} B={fields} f={field_bits} base={base:?} k={k} v={v}")
                            })?;
                            ensure(l.is_clean(out), || format!("dirty padding B={fields} f={field_bits} k={k} v={v}"))?;
                            calls += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{calls} word-level updates equal the scalar loop, padding always clean"))
}

fn naive_binary_select(o: &mut NaivePrefixOracle, sigma: i64) -> usize {
    let (mut lo, mut hi) = (0, o.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if o.sum(mid).unwrap() >= sigma {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn c3_select_discipline() -> Outcome {
    const OPS: usize = 100_000;
    let n = 256;
    let cases = [(128u32, 8u32), (128, 4), (64, 4), (64, 1)];
    let results: Vec<Result<(u64, usize), String>> = cases
        .par_iter()
        .flat_map(|&(b, delta)| {
            [SuccessorStrategy::BinarySearch, SuccessorStrategy::BroadcastCompare].into_par_iter().map(move |strategy| {
                let seq = select_mix(OPS, n, delta, 0x5E1EC7 + delta as u64).map_err(|e| e.to_string())?;
                let mut tree =
                    PackedTree::new(PlainMemory::new(b).unwrap(), n, delta, ArrayMode::SelectEnabled, strategy)
                        .map_err(|e| format!("b={b} delta={delta}: {e}"))?;
                let mut naive = NaivePrefixOracle::plain(n, delta);
                for op in &seq.ops {
                    match *op {
                        Op::Update { k, delta } => {
                            tree.update(k, delta).map_err(|e| e.to_string())?;
                            naive.update(k, delta).map_err(|e| e.to_string())?;
                        }
                        Op::Select { sigma, expected } => {
                            let want = naive_binary_select(&mut naive, sigma);
                            ensure(want == expected, || format!("generator select({sigma}) = {expected}, oracle {want}"))?;
                            let got = tree.select(sigma).map_err(|e| e.to_string())?;
                            ensure(got == want, || format!("b={b} delta={delta} {strategy:?}: select({sigma}) = {got}, want {want}"))?;
                        }
                        _ => return Err("unexpected op".into()),
                    }
                }
                let (selects, violations) = tree.audit_counts();
                ensure(violations == 0, || format!("{violations} selects inspected outside the candidates"))?;
                Ok((selects, tree.branching()))
            })
        })
        .collect();
    let mut selects = 0;
    for r in results {
        selects += r?.0;
    }
    Ok(format!("{selects} selects across 8 configs match the oracle, all inspections within the three candidates"))
}

fn c4_conservation() -> Outcome {
    let mut checks = 0;
    for t in 0..50u64 {
        let mut rng = SplitMix64::stream(0xC0, t);
        let ops = 1 + rng.below(300);
        let mut mem = TracedMemory::new(64).unwrap();
        let addrs = 1 + rng.below(24);
        for op in 0..ops {
            mem.set_current_op(op).unwrap();
            for _ in 0..rng.below(6) {
                let a = rng.below(addrs);
                if rng.below(2) == 0 {
                    mem.read(a).unwrap();
                } else {
                    mem.write(a, rng.below(1000) as u128).unwrap();
                }
            }
        }
        let trace = mem.take_trace();
        for arity in [2u64, 4, 8] {
            let tree = build_time_tree(&trace, ops, arity).map_err(|e| e.to_string())?;
            let cross = total_cross_reads(&trace);
            ensure(tree.total_transfer() == cross, || format!("trace {t} arity {arity}"))?;
            ensure(tree.per_level_transfer().iter().sum::<u64>() == cross, || format!("levels trace {t}"))?;
            checks += 1;
        }
    }
    let families = [
        (StructureId::ClassicFu, Family::Random),
        (StructureId::ClassicFq, Family::Bitrev),
        (StructureId::Packed, Family::Tradeoff),
        (StructureId::PackedSelect, Family::SelectMix),
        (StructureId::Naive, Family::Random),
        (StructureId::Ett, Family::Permbox),
        (StructureId::Ett, Family::PermboxBitrev),
    ];
    for (structure, family) in families {
        for arity in [2u64, 4, 8] {
            let cfg = ExperimentConfig {
                structure,
                family,
                n: 512,
                b: 128,
                ops: 2000,
                t_u: 4,
                t_q: 2,
                side: 16,
                arity,
                seed: 4,
                ..Default::default()
            };
            let res = run_experiment(&cfg).map_err(|e| format!("{structure}/{family}: {e}"))?;
            let cross = total_cross_reads(&res.trace);
            ensure(res.tree.total_transfer() == cross && res.row.transfer_total == cross, || {
                format!("{structure}/{family} arity {arity}")
            })?;
            ensure(res.row.per_level_transfer.iter().sum::<u64>() == cross, || format!("{structure}/{family} levels"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} traces x arities: node transfers sum to the cross reads"))
}

fn merge_interleaving(a: &[u64], b: &[u64]) -> u64 {
    let mut merged: Vec<(u64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    merged.sort_unstable();
    merged.windows(2).filter(|w| w[0].1 && !w[1].1).count() as u64
}

fn c5_interleaving_stats() -> Outcome {
    const L: usize = 1000;
    let mut total = 0u64;
    for trial in 0..100u64 {
        let mut rng = SplitMix64::stream(0x1EAF, trial);
        let mut seen = HashSet::new();
        let mut values = Vec::with_capacity(2 * L);
        while values.len() < 2 * L {
            let x = rng.below(1 << 40);
            if seen.insert(x) {
                values.push(x);
            }
        }
        let order = rng.permutation(2 * L);
        let a: Vec<u64> = order[..L].iter().map(|&i| values[i]).collect();
        let b: Vec<u64> = order[L..].iter().map(|&i| values[i]).collect();
        let got = interleaving(&a, &b);
        let want = merge_interleaving(&a, &b);
        ensure(got == want, || format!("trial {trial}: interleaving {got}, merge oracle {want}"))?;
        total += got;
    }
    let mean = total as f64 / 100.0;
    ensure((0.4 * L as f64..=0.6 * L as f64).contains(&mean), || format!("mean {mean} outside [400, 600]"))?;
    Ok(format!("mean interleaving {mean:.1} at L = {L}"))
}

fn c6_bitrev_interleaving() -> Outcome {
    let mut ratios = Vec::new();
    for lg in 6..=12u32 {
        let n = 1usize << lg;
        let seq = bitrev_sequence(n, 8, 1).map_err(|e| e.to_string())?;
        let total = binary_tree_interleaving(&sum_accesses(&seq), seq.len() as u64);
        ratios.push(total as f64 / (n as f64 * lg as f64));
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / min;
    ensure(min > 0.0 && spread < 0.10, || format!("ratios {ratios:?} vary by {:.1}%", spread * 100.0))?;
    Ok(format!("total / (n lg n) in [{min:.4}, {max:.4}], spread {:.2}%", spread * 100.0))
}

fn c7_probe_shape() -> Outcome {
    let mut cfgs = Vec::new();
    for lg in 8..=18u32 {
        for (structure, b) in [(StructureId::ClassicFu, 64u32), (StructureId::Packed, 128)] {
            cfgs.push(ExperimentConfig {
                structure,
                family: Family::Random,
                n: 1 << lg,
                b,
                delta: 8,
                ops: 1 << 14,
                seed: 7,
                ..Default::default()
            });
        }
    }
    let results = run_experiments(&cfgs);
    let mut classic = Vec::new();
    let mut cmp = Vec::new();
    for pair in results.chunks(2) {
        let c = pair[0].as_ref().map_err(|e| e.to_string())?;
        let p = pair[1].as_ref().map_err(|e| e.to_string())?;
        ensure(c.mismatches == 0 && p.mismatches == 0, || "wrong answers".into())?;
        classic.push((c.row.n, c.row.amortized_per_op));
        let reads = |r: &cellprobe::bench::ExperimentResult| r.row.total_reads as f64 / r.num_ops as f64;
        cmp.push((c.row.n, reads(c), reads(p)));
    }
    let fit = fit_log_points(&classic).map_err(|e| e.to_string())?;
    ensure(fit.r2 > 0.99, || format!("classic fit r2 = {}", fit.r2))?;
    for &(n, c, p) in &cmp {
        if n >= 1 << 12 {
            ensure(p < c, || format!("n = {n}: packed {p:.3} reads/op not below classic {c:.3}"))?;
        }
    }
    let worst = cmp.iter().filter(|x| x.0 >= 1 << 12).map(|x| x.2 / x.1).fold(0.0, f64::max);
    Ok(format!(
        "classic probes = {:.3} lg n + {:.3} (r2 {:.5}); packed/classic reads <= {worst:.3} for n >= 2^12",
        fit.slope, fit.intercept, fit.r2
    ))
}

fn trace_wire(adj: &HashMap<usize, Vec<usize>>, side: usize, y: usize, x: usize) -> usize {
    let mut v = y;
    for col in 1..=x {
        v = *adj[&v].iter().find(|&&w| w / side == col).expect("grid edge to next column");
    }
    v % side
}

fn c8_connectivity() -> Outcome {
    let side = 16;
    let runs = [
        (BoxOrder::Uniform, QueryMode::Macro, 200usize, 16usize),
        (BoxOrder::Uniform, QueryMode::Random, 200, 16),
        (BoxOrder::Bitrev, QueryMode::Random, 16, 600),
    ];
    let mut total_ops = 0;
    let mut queries = 0;
    for (i, &(box_order, query_mode, blocks, qpb)) in runs.iter().enumerate() {
        let params = PermBoxParams {
            side,
            blocks,
            queries_per_block: qpb,
            box_order,
            query_mode,
            random_initial: true,
            seed: 80 + i as u64,
        };
        let run = permbox_run(&params).map_err(|e| e.to_string())?;
        let nv = run.sequence.header.n;
        let mut ett = EulerTourForest::plain(nv);
        let mut bfs = GraphOracle::new(nv);
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        let mut block = 0;
        let mut rng = SplitMix64::new(i as u64);
        let check_block = |edges: &HashSet<(usize, usize)>, inst: &PermBoxInstance| -> Result<(), String> {
            let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
            for &(u, v) in edges {
                adj.entry(u).or_default().push(v);
                adj.entry(v).or_default().push(u);
            }
            for x in 0..=side {
                let pi: Permutation = compose_prefix(inst, x);
                for y in 0..side {
                    ensure(pi.apply(y) == trace_wire(&adj, side, y, x), || format!("compose_prefix({x}) at row {y}"))?;
                }
            }
            Ok(())
        };
        let mut prev_was_query = false;
        for op in &run.sequence.ops {
            total_ops += 1;
            match *op {
                Op::Insert { u, v } => {
                    if prev_was_query {
                        block += 1;
                        prev_was_query = false;
                    }
                    ett.link(u, v).map_err(|e| e.to_string())?;
                    bfs.insert(u, v).map_err(|e| e.to_string())?;
                    edges.insert((u, v));
                }
                Op::Delete { u, v } => {
                    if prev_was_query {
                        block += 1;
                        prev_was_query = false;
                    }
                    ett.cut(u, v).map_err(|e| e.to_string())?;
                    bfs.delete(u, v).map_err(|e| e.to_string())?;
                    edges.remove(&(u, v));
                }
                Op::Connected { u, v, expected } => {
                    if !prev_was_query {
                        // first query of a block: the macro-update is complete
                        ensure(bfs.components() == side, || format!("block {block}: not {side} paths"))?;
                        check_block(&edges, &run.states[block + 1])?;
                    }
                    prev_was_query = true;
                    let want = bfs.connected(u, v).map_err(|e| e.to_string())?;
                    ensure(want == expected, || format!("generator expected {expected} for ({u},{v})"))?;
                    ensure(ett.connected(u, v).map_err(|e| e.to_string())? == want, || format!("ETT wrong on ({u},{v})"))?;
                    // an unconstrained pair as well, so negative answers are exercised
                    let (a, b) = (rng.below(nv as u64) as usize, rng.below(nv as u64) as usize);
                    ensure(ett.connected(a, b).unwrap() == bfs.connected(a, b).unwrap(), || format!("ETT wrong on ({a},{b})"))?;
                    queries += 2;
                }
                _ => return Err("sums op in graph sequence".into()),
            }
        }
        ensure(ett.components() == bfs.components(), || "component counts differ".into())?;
    }
    ensure(total_ops >= 10_000, || format!("only {total_ops} ops"))?;
    Ok(format!("{total_ops} permbox ops, {queries} connectivity answers match BFS; compose_prefix matches wires every block"))
}

fn c9_reductions() -> Outcome {
    let side = 8;
    let params = PermBoxParams::new(side, 0, 9);
    let inst = permbox_run(&params).map_err(|e| e.to_string())?.states.remove(0);
    let nv = inst.num_vertices();
    let mut w = GadgetGraph::new(nv);
    let mut direct = GraphOracle::new(nv);
    for (u, v) in inst.edges() {
        w.insert(u, v).map_err(|e| e.to_string())?;
        direct.insert(u, v).map_err(|e| e.to_string())?;
    }
    let column: Vec<usize> = (0..side).collect();
    w.install_gadget(&column).map_err(|e| e.to_string())?;
    let mut rng = SplitMix64::new(99);
    let mut positives = 0;
    for q in 0..1000 {
        let u = rng.below(side as u64) as usize;
        let v = rng.below(nv as u64) as usize;
        let before = w.edge_set().clone();
        let comps = w.graph().components();
        let got = w.reduce_connectivity_query_via_whole(u, v).map_err(|e| e.to_string())?;
        let want = direct.connected(u, v).unwrap();
        ensure(got == want, || format!("query {q}: ({u},{v}) gave {got}, want {want}"))?;
        ensure(w.edge_set() == &before && w.graph().components() == comps, || format!("query {q} changed the graph"))?;
        positives += usize::from(want);
    }

    let mut connected_cases = 0;
    for t in 0..1000u64 {
        let mut rng = SplitMix64::stream(0xF0, t);
        let n = 1 + rng.below(30) as usize;
        let target = rng.below(n as u64) as usize;
        let mut g = DynamicGraph::plain(n);
        let mut o = GraphOracle::new(n);
        let mut added = 0;
        let mut tries = 0;
        while added < target && tries < 10_000 {
            tries += 1;
            let (u, v) = (rng.below(n as u64) as usize, rng.below(n as u64) as usize);
            if u != v && !o.connected(u, v).unwrap() {
                g.insert(u, v).unwrap();
                o.insert(u, v).unwrap();
                added += 1;
            }
        }
        let msf = msf_cost_unit(&g);
        let whole = whole_graph_connected(&g);
        ensure(msf == n - o.components(), || format!("forest {t}: msf {msf}, oracle {}", n - o.components()))?;
        ensure((msf == n - 1) == whole, || format!("forest {t}: msf {msf} vs whole {whole}"))?;
        connected_cases += usize::from(whole);
    }
    ensure(positives > 0 && positives < 1000, || "queries did not cover both answers".into())?;
    ensure(connected_cases > 0 && connected_cases < 1000, || "forests did not cover both cases".into())?;
    Ok(format!(
        "1000 reduced queries ({positives} true) match and restore the edge set; 1000 forests ({connected_cases} spanning) satisfy msf = n-1 iff connected"
    ))
}

fn c10_separator() -> Outcome {
    let mut cases = Vec::new();
    for a in 1..=3usize {
        for b in 1..=3usize {
            for u in [8usize, 16, 32] {
                cases.push((a, b, u));
            }
        }
    }
    type Built = (usize, usize, usize, u32, usize, f64);
    let systems: Vec<Result<Built, String>> = cases
        .par_iter()
        .map(|&(a, b, u)| {
            let sys = build_system_with_cap(a, b, u, 10, 1 << 26).map_err(|e| format!("({a},{b},{u}): {e}"))?;
            ensure(sys.verified, || format!("({a},{b},{u}) unverified"))?;
            Ok((a, b, u, sys.attempts, sys.len(), sys.size_constant()))
        })
        .collect();
    let mut max_c: f64 = 0.0;
    let mut max_attempts = 0;
    for s in systems {
        let (_, _, _, attempts, _, c) = s?;
        max_c = max_c.max(c);
        max_attempts = max_attempts.max(attempts);
    }
    let first_try = (0..10u64)
        .into_par_iter()
        .filter(|&seed| build_system(2, 2, 16, seed).map(|s| s.attempts == 1).unwrap_or(false))
        .count();
    ensure(first_try >= 9, || format!("only {first_try}/10 seeds verified first try at a=b=2, u=16"))?;
    Ok(format!(
        "18 systems verified (at most {max_attempts} attempts); {first_try}/10 first-try at (2,2,16); size constant C <= {max_c:.3}"
    ))
}

fn c11_reproducibility() -> Outcome {
    let cfgs: Vec<ExperimentConfig> = [
        (StructureId::ClassicFq, Family::Tradeoff),
        (StructureId::Packed, Family::Random),
        (StructureId::PackedSelect, Family::SelectMix),
        (StructureId::Ett, Family::PermboxBitrev),
    ]
    .iter()
    .map(|&(structure, family)| ExperimentConfig {
        structure,
        family,
        n: 1024,
        b: 128,
        ops: 3000,
        t_u: 3,
        t_q: 1,
        seed: 2024,
        ..Default::default()
    })
    .collect();
    let run = || -> Result<(String, Vec<String>), String> {
        let mut rows = Vec::new();
        for r in run_experiments(&cfgs) {
            rows.push(r.map_err(|e| e.to_string())?.row);
        }
        let jsonl = cfgs.iter().map(|c| c.sequence().map(|s| s.to_jsonl()).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
        Ok((csv_string(&rows), jsonl))
    };
    let (csv1, j1) = run()?;
    let (csv2, j2) = run()?;
    ensure(csv1 == csv2, || "CSV differs between runs".into())?;
    ensure(j1 == j2, || "JSONL differs between runs".into())?;
    let bytes: usize = j1.iter().map(String::len).sum::<usize>() + csv1.len();
    Ok(format!("{} CSV rows and {} sequences byte-identical across runs ({bytes} bytes)", cfgs.len(), j1.len()))
}

type Criterion = (&'static str, f64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence (sums)", 60.0, c1_oracle_equivalence),
        ("word-parallel correctness", 5.0, c2_word_parallel),
        ("select discipline", 30.0, c3_select_discipline),
        ("transfer conservation", 10.0, c4_conservation),
        ("interleaving statistics", 5.0, c5_interleaving_stats),
        ("bit-reversal total interleaving", 10.0, c6_bitrev_interleaving),
        ("lg n probe shape", 120.0, c7_probe_shape),
        ("connectivity equivalence", 30.0, c8_connectivity),
        ("reductions", 10.0, c9_reductions),
        ("separator lemma at desk scale", 60.0, c10_separator),
        ("reproducibility", 5.0, c11_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let over = secs > *budget;
        match (&outcome, over) {
            (Ok(detail), false) => println!("PASS {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            (Ok(detail), true) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}, but took {secs:.2}s > {budget}s", i + 1)
            }
            (Err(why), _) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.2}s)", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
