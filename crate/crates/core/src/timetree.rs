//! Time-tree analysis of probe traces.
//!
//! The leaves of a time tree are the operations in execution order. A read
//! of a cell last written by an earlier operation is charged to exactly one
//! node: the lowest common ancestor of the writing and the reading
//! operation. The count at a node is its information transfer.

use std::io::{self, Write};

use thiserror::Error;

use crate::memory::ProbeEvent;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimeTreeError {
    #[error("event at op {op} outside a trace of {num_ops} operations")]
    OpOutOfRange { op: u64, num_ops: u64 },
    #[error("a time tree needs at least one operation")]
    Empty,
    #[error("arity must be at least 2, got {0}")]
    BadArity(u64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TimeNode {
    pub lo: u64,
    pub hi: u64,
    /// Cross reads whose writer and reader meet first at this node.
    pub transfer: u64,
    /// Reads inside this node of cells last written under a left sibling.
    pub left_sibling_transfer: u64,
    /// Reads under right siblings of cells last written inside this node.
    pub right_sibling_transfer: u64,
}

/// A complete `arity`-ary tree over the operations, padded with empty leaves.
#[derive(Debug, Clone)]
pub struct TimeTree {
    arity: u64,
    num_ops: u64,
    /// `levels[0]` is the root, the last level holds the leaves.
    levels: Vec<Vec<TimeNode>>,
}

impl TimeTree {
    pub fn arity(&self) -> u64 {
        self.arity
    }

    pub fn num_ops(&self) -> u64 {
        self.num_ops
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<TimeNode>] {
        &self.levels
    }

    pub fn root(&self) -> &TimeNode {
        &self.levels[0][0]
    }

    pub fn node(&self, level: usize, index: usize) -> Option<&TimeNode> {
        self.levels.get(level)?.get(index)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TimeNode> {
        self.levels.iter().flatten()
    }

    pub fn total_transfer(&self) -> u64 {
        self.nodes().map(|n| n.transfer).sum()
    }

    /// Transfer summed per level, root first.
    pub fn per_level_transfer(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.iter().map(|n| n.transfer).sum()).collect()
    }

    /// CSV with columns `level,node_index,lo,hi,transfer`; level 0 is the root.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "level,node_index,lo,hi,transfer")?;
        for (level, nodes) in self.levels.iter().enumerate() {
            for (i, n) in nodes.iter().enumerate() {
                writeln!(out, "{level},{i},{},{},{}", n.lo, n.hi, n.transfer)?;
            }
        }
        Ok(())
    }
}

pub fn build_time_tree(
    trace: &[ProbeEvent],
    num_ops: u64,
    arity: u64,
) -> Result<TimeTree, TimeTreeError> {
    if arity < 2 {
        return Err(TimeTreeError::BadArity(arity));
    }
    if num_ops == 0 {
        return Err(TimeTreeError::Empty);
    }
    if let Some(e) = trace.iter().find(|e| e.op_index >= num_ops) {
        return Err(TimeTreeError::OpOutOfRange { op: e.op_index, num_ops });
    }

    let mut height = 0usize;
    let mut leaves = 1u64;
    while leaves < num_ops {
        leaves *= arity;
        height += 1;
    }
    // spans[d] = number of leaves under a node at depth d
    let spans: Vec<u64> = (0..=height).map(|d| arity.pow((height - d) as u32)).collect();
    let mut levels: Vec<Vec<TimeNode>> = spans
        .iter()
        .map(|&span| {
            (0..leaves / span)
                .map(|j| TimeNode { lo: j * span, hi: (j + 1) * span - 1, ..Default::default() })
                .collect()
        })
        .collect();

    for e in trace.iter().filter(|e| e.is_cross_read()) {
        let (w, r) = (e.last_write_op.unwrap(), e.op_index);
        // deepest level whose node contains both w and r
        let mut d = height;
        while w / spans[d] != r / spans[d] {
            d -= 1;
        }
        levels[d][(r / spans[d]) as usize].transfer += 1;
        let child = spans[d + 1];
        levels[d + 1][(r / child) as usize].left_sibling_transfer += 1;
        levels[d + 1][(w / child) as usize].right_sibling_transfer += 1;
    }

    Ok(TimeTree { arity, num_ops, levels })
}

/// Reads of cells last written by a strictly earlier operation.
pub fn total_cross_reads(trace: &[ProbeEvent]) -> u64 {
    trace.iter().filter(|e| e.is_cross_read()).count() as u64
}

/// Number of `i` with some `b` in `(a_i, a_{i+1}]` after sorting both
/// lists, taking `a_{last+1} = +inf`.
pub fn interleaving(a: &[u64], b: &[u64]) -> u64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    interleaving_sorted(&a, &b)
}

fn interleaving_sorted(a: &[u64], b: &[u64]) -> u64 {
    let mut count = 0;
    for (i, &ai) in a.iter().enumerate() {
        let j = b.partition_point(|&x| x <= ai);
        match (b.get(j), a.get(i + 1)) {
            (Some(&bj), Some(&next)) if bj <= next => count += 1,
            (Some(_), None) => count += 1,
            _ => {}
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Update,
    Query,
}

/// An operation of a workload reduced to what the interleaving analysis sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub op_index: u64,
    pub kind: AccessKind,
    pub index: u64,
}

/// Sum over all nodes of a binary time tree of the interleaving between the
/// indices updated under the left child and those queried under the right child.
pub fn binary_tree_interleaving(accesses: &[Access], num_ops: u64) -> u64 {
    let leaves = num_ops.max(1).next_power_of_two();
    let mut sorted = accesses.to_vec();
    sorted.sort_by_key(|a| a.op_index);
    let (_, _, total) = interleave_rec(&sorted, 0, leaves);
    total
}

// Returns (sorted update indices, sorted query indices, interleaving total) for [lo, lo+span).
fn interleave_rec(accesses: &[Access], lo: u64, span: u64) -> (Vec<u64>, Vec<u64>, u64) {
    if span == 1 || accesses.is_empty() {
        let mut ups: Vec<u64> =
            accesses.iter().filter(|a| a.kind == AccessKind::Update).map(|a| a.index).collect();
        let mut qs: Vec<u64> =
            accesses.iter().filter(|a| a.kind == AccessKind::Query).map(|a| a.index).collect();
        ups.sort_unstable();
        qs.sort_unstable();
        return (ups, qs, 0);
    }
    let half = span / 2;
    let split = accesses.partition_point(|a| a.op_index < lo + half);
    let (lu, lq, lt) = interleave_rec(&accesses[..split], lo, half);
    let (ru, rq, rt) = interleave_rec(&accesses[split..], lo + half, half);
    let here = interleaving_sorted(&lu, &rq);
    (merge(lu, ru), merge(lq, rq), lt + rt + here)
}

fn merge(a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::ProbeKind;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    fn read(op: u64, addr: u64, lw: Option<u64>) -> ProbeEvent {
        ProbeEvent { op_index: op, kind: ProbeKind::Read, address: addr, last_write_op: lw }
    }

    fn write(op: u64, addr: u64) -> ProbeEvent {
        ProbeEvent { op_index: op, kind: ProbeKind::Write, address: addr, last_write_op: None }
    }

    #[test]
    fn cross_read_at_root() {
        let t = build_time_tree(&[write(0, 9), read(2, 9, Some(0))], 4, 2).unwrap();
        assert_eq!(t.root().transfer, 1);
        assert_eq!(t.total_transfer(), 1);
    }

    #[test]
    fn cross_read_at_lower_node() {
        let t = build_time_tree(&[write(2, 9), read(3, 9, Some(2))], 4, 2).unwrap();
        assert_eq!(t.root().transfer, 0);
        assert_eq!(t.node(1, 1).unwrap().transfer, 1);
        assert_eq!((t.node(1, 1).unwrap().lo, t.node(1, 1).unwrap().hi), (2, 3));
        assert_eq!(t.total_transfer(), 1);
    }

    #[test]
    fn same_op_and_initial_reads_are_not_transfer() {
        let trace = [write(3, 1), read(3, 1, Some(3)), read(3, 2, None)];
        assert_eq!(total_cross_reads(&trace), 0);
        assert_eq!(total_cross_reads(&[]), 0);
        assert_eq!(total_cross_reads(&[write(0, 1), read(2, 1, Some(0))]), 1);
        assert_eq!(build_time_tree(&trace, 4, 2).unwrap().total_transfer(), 0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(
            build_time_tree(&[read(4, 1, Some(0))], 4, 2).unwrap_err(),
            TimeTreeError::OpOutOfRange { op: 4, num_ops: 4 }
        );
        assert_eq!(build_time_tree(&[], 0, 2).unwrap_err(), TimeTreeError::Empty);
        assert_eq!(build_time_tree(&[], 3, 1).unwrap_err(), TimeTreeError::BadArity(1));
    }

    #[test]
    fn single_op_tree() {
        let t = build_time_tree(&[write(0, 1), read(0, 1, Some(0))], 1, 2).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.total_transfer(), 0);
    }

    #[test]
    fn padded_ternary_tree_shape() {
        let t = build_time_tree(&[], 10, 3).unwrap();
        assert_eq!(t.depth(), 3);
        assert_eq!(t.levels()[3].len(), 27);
        assert_eq!(t.levels()[1][2].lo, 18);
        assert_eq!(t.levels()[1][2].hi, 26);
    }

    #[test]
    fn csv_export() {
        let t = build_time_tree(&[write(0, 9), read(1, 9, Some(0))], 2, 2).unwrap();
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "level,node_index,lo,hi,transfer\n0,0,0,1,1\n1,0,0,0,0\n1,1,1,1,0\n"
        );
    }

    #[test]
    fn interleaving_examples() {
        assert_eq!(interleaving(&[1, 5], &[3, 7]), 2);
        assert_eq!(interleaving(&[1, 2, 3], &[10]), 1);
        assert_eq!(interleaving(&[], &[4]), 0);
        assert_eq!(interleaving(&[4], &[]), 0);
        assert_eq!(interleaving(&[5, 1], &[7, 3]), 2);
    }

    // Direct merge-and-count: walk the merged order and count a-run to b-run switches.
    fn merge_count(a: &[u64], b: &[u64]) -> u64 {
        let mut tagged: Vec<(u64, u8)> =
            a.iter().map(|&x| (x, 0)).chain(b.iter().map(|&x| (x, 1))).collect();
        // ties: an a equal to a b comes after it, since b_j <= a_{i+1} counts
        tagged.sort_by_key(|&(x, t)| (x, if t == 1 { 0 } else { 1 }));
        let mut count = 0;
        let mut prev_a = false;
        for &(_, t) in &tagged {
            if t == 1 && prev_a {
                count += 1;
            }
            prev_a = t == 0;
        }
        count
    }

    fn random_trace(seed: u64, ops: u64) -> Vec<ProbeEvent> {
        let mut rng = SplitMix64::new(seed);
        let mut last: std::collections::HashMap<u64, u64> = Default::default();
        let mut trace = Vec::new();
        for op in 0..ops {
            for _ in 0..rng.below(6) {
                let addr = rng.below(16);
                if rng.below(2) == 0 {
                    trace.push(write(op, addr));
                    last.insert(addr, op);
                } else {
                    trace.push(read(op, addr, last.get(&addr).copied()));
                }
            }
        }
        trace
    }

    #[test]
    fn conservation_on_random_64_op_trace() {
        let trace = random_trace(42, 64);
        let direct = trace
            .iter()
            .filter(|e| e.kind == ProbeKind::Read && e.last_write_op.is_some_and(|w| w < e.op_index))
            .count() as u64;
        for arity in [2, 4, 8] {
            let t = build_time_tree(&trace, 64, arity).unwrap();
            assert_eq!(t.total_transfer(), direct);
            assert_eq!(t.nodes().map(|n| n.left_sibling_transfer).sum::<u64>(), direct);
            assert_eq!(t.nodes().map(|n| n.right_sibling_transfer).sum::<u64>(), direct);
        }
    }

    #[test]
    fn binary_transfer_matches_definition() {
        let trace = random_trace(5, 32);
        let t = build_time_tree(&trace, 32, 2).unwrap();
        for (d, level) in t.levels().iter().enumerate().take(t.depth()) {
            for (j, node) in level.iter().enumerate() {
                let left = t.node(d + 1, 2 * j).unwrap();
                let right = t.node(d + 1, 2 * j + 1).unwrap();
                let expect = trace
                    .iter()
                    .filter(|e| e.kind == ProbeKind::Read)
                    .filter(|e| (right.lo..=right.hi).contains(&e.op_index))
                    .filter(|e| e.last_write_op.is_some_and(|w| (left.lo..=left.hi).contains(&w)))
                    .count() as u64;
                assert_eq!(node.transfer, expect, "node ({d},{j})");
            }
        }
    }

    #[test]
    fn tree_interleaving_small_case() {
        // ops: U(0) Q(1) U(1) Q(0); root: left updates {0}, right queries {0}
        let acc = [
            Access { op_index: 0, kind: AccessKind::Update, index: 0 },
            Access { op_index: 1, kind: AccessKind::Query, index: 1 },
            Access { op_index: 2, kind: AccessKind::Update, index: 1 },
            Access { op_index: 3, kind: AccessKind::Query, index: 0 },
        ];
        // node [0,1]: a={0}, b={1} -> 1; node [2,3]: a={1}, b={0} -> 0; root: a={0}, b={0} -> 0
        assert_eq!(binary_tree_interleaving(&acc, 4), 1);
    }

    proptest! {
        #[test]
        fn interleaving_matches_merge_oracle(
            a in proptest::collection::vec(0u64..40, 0..20),
            b in proptest::collection::vec(0u64..40, 0..20),
        ) {
            let mut sa = a.clone();
            let mut sb = b.clone();
            sa.sort_unstable();
            sb.sort_unstable();
            let l = interleaving(&a, &b);
            prop_assert_eq!(l, merge_count(&sa, &sb));
            prop_assert!(l <= a.len().min(b.len()) as u64);
            let mut ra = a.clone();
            ra.reverse();
            prop_assert_eq!(interleaving(&ra, &b), l);
        }

        #[test]
        fn conservation_holds(seed in any::<u64>(), ops in 1u64..80, arity in 2u64..6) {
            let trace = random_trace(seed, ops);
            let t = build_time_tree(&trace, ops, arity).unwrap();
            let cross = total_cross_reads(&trace);
            prop_assert_eq!(t.total_transfer(), cross);
            prop_assert_eq!(t.per_level_transfer().iter().sum::<u64>(), cross);
            prop_assert_eq!(t.nodes().map(|n| n.left_sibling_transfer).sum::<u64>(), cross);
            prop_assert_eq!(t.nodes().map(|n| n.right_sibling_transfer).sum::<u64>(), cross);
        }
    }
}
