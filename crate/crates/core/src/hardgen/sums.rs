use super::{bitrev_perm, GenError, Op, OpSequence, SequenceHeader};
use crate::rng::SplitMix64;
use crate::sums::{PartialSums, SumsError};
use crate::timetree::{Access, AccessKind};

/// Plain Fenwick tree used to attach expected answers while generating.
#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    pub fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    pub fn add(&mut self, k: usize, delta: i64) {
        let mut i = k + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// `A[0] + ... + A[k]`.
    pub fn prefix(&self, k: usize) -> i64 {
        let mut i = k + 1;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }

    pub fn value(&self, k: usize) -> i64 {
        self.prefix(k) - if k > 0 { self.prefix(k - 1) } else { 0 }
    }

    /// Smallest `i` with `prefix(i) >= sigma`; requires positive elements.
    pub fn select(&self, sigma: i64) -> Option<usize> {
        let n = self.tree.len() - 1;
        if sigma < 1 || n == 0 || self.prefix(n - 1) < sigma {
            return None;
        }
        let mut pos = 0;
        let mut rest = sigma;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] < rest {
                pos = next;
                rest -= self.tree[next];
            }
            step /= 2;
        }
        Some(pos)
    }
}

fn check_delta(delta: u32) -> Result<i64, GenError> {
    if !(1..=62).contains(&delta) {
        return Err(GenError::Parameter(format!("delta width {delta} outside 1..=62")));
    }
    Ok((1i64 << delta) - 1)
}

fn header(family: &str, n: usize, delta: u32, seed: u64) -> SequenceHeader {
    SequenceHeader { family: family.into(), n, delta, seed, side: None }
}

/// `m` ops alternating update and sum at uniform indices; op `j` draws from
/// substream `j`.
pub fn random_alternating(m: usize, n: usize, delta: u32, seed: u64) -> Result<OpSequence, GenError> {
    let dmax = check_delta(delta)?;
    if !m.is_multiple_of(2) {
        return Err(GenError::Parameter(format!("op count {m} must be even")));
    }
    if n == 0 && m > 0 {
        return Err(GenError::Parameter("empty array".into()));
    }
    let mut fw = Fenwick::new(n);
    let mut ops = Vec::with_capacity(m);
    for j in 0..m {
        let mut rng = SplitMix64::stream(seed, j as u64);
        let k = rng.below(n as u64) as usize;
        if j % 2 == 0 {
            let d = rng.range_inclusive(-dmax, dmax);
            fw.add(k, d);
            ops.push(Op::Update { k, delta: d });
        } else {
            ops.push(Op::Sum { k, expected: fw.prefix(k) });
        }
    }
    Ok(OpSequence { header: header("random", n, delta, seed), ops })
}

/// `n` update/sum pairs, pair `i` touching index `bitrev(i)`.
pub fn bitrev_sequence(n: usize, delta: u32, seed: u64) -> Result<OpSequence, GenError> {
    let dmax = check_delta(delta)?;
    if !n.is_power_of_two() {
        return Err(GenError::Parameter(format!("n = {n} is not a power of two")));
    }
    let pi = bitrev_perm(n.trailing_zeros());
    let mut fw = Fenwick::new(n);
    let mut ops = Vec::with_capacity(2 * n);
    for i in 0..n {
        let k = pi.apply(i);
        let d = SplitMix64::stream(seed, 2 * i as u64).range_inclusive(-dmax, dmax);
        fw.add(k, d);
        ops.push(Op::Update { k, delta: d });
        ops.push(Op::Sum { k, expected: fw.prefix(k) });
    }
    Ok(OpSequence { header: header("bitrev", n, delta, seed), ops })
}

/// Blocks of `t_q` random updates followed by `t_u` random sums.
pub fn tradeoff_blocks(
    num_blocks: usize,
    t_u: usize,
    t_q: usize,
    n: usize,
    delta: u32,
    seed: u64,
) -> Result<OpSequence, GenError> {
    let dmax = check_delta(delta)?;
    if t_u == 0 || t_q == 0 {
        return Err(GenError::Parameter("t_u and t_q must be at least 1".into()));
    }
    if n == 0 {
        return Err(GenError::Parameter("empty array".into()));
    }
    let mut fw = Fenwick::new(n);
    let mut ops = Vec::with_capacity(num_blocks * (t_u + t_q));
    for _ in 0..num_blocks {
        for slot in 0..t_q + t_u {
            let mut rng = SplitMix64::stream(seed, ops.len() as u64);
            let k = rng.below(n as u64) as usize;
            if slot < t_q {
                let d = rng.range_inclusive(-dmax, dmax);
                fw.add(k, d);
                ops.push(Op::Update { k, delta: d });
            } else {
                ops.push(Op::Sum { k, expected: fw.prefix(k) });
            }
        }
    }
    Ok(OpSequence { header: header("tradeoff", n, delta, seed), ops })
}

/// Positive-array workload for select: `n` initial updates making every
/// element positive, then `m` ops alternating updates that keep elements
/// positive with selects of a uniform `sigma` in `1..=total`.
pub fn select_mix(m: usize, n: usize, delta: u32, seed: u64) -> Result<OpSequence, GenError> {
    let dmax = check_delta(delta)?;
    if n == 0 {
        return Err(GenError::Parameter("empty array".into()));
    }
    let mut fw = Fenwick::new(n);
    let mut ops = Vec::with_capacity(n + m);
    for k in 0..n {
        let d = SplitMix64::stream(seed, k as u64).range_inclusive(1, dmax);
        fw.add(k, d);
        ops.push(Op::Update { k, delta: d });
    }
    for j in 0..m {
        let mut rng = SplitMix64::stream(seed, (n + j) as u64);
        if j % 2 == 0 {
            let k = rng.below(n as u64) as usize;
            let lo = (1 - fw.value(k)).max(-dmax);
            let d = rng.range_inclusive(lo, dmax);
            fw.add(k, d);
            ops.push(Op::Update { k, delta: d });
        } else {
            let total = fw.prefix(n - 1);
            let sigma = rng.range_inclusive(1, total);
            let expected = fw.select(sigma).expect("sigma within total");
            ops.push(Op::Select { sigma, expected });
        }
    }
    Ok(OpSequence { header: header("select-mix", n, delta, seed), ops })
}

/// The update/query index pattern of a sums sequence, for interleaving analysis.
pub fn sum_accesses(seq: &OpSequence) -> Vec<Access> {
    seq.ops
        .iter()
        .enumerate()
        .filter_map(|(i, op)| {
            let (kind, index) = match *op {
                Op::Update { k, .. } => (AccessKind::Update, k),
                Op::Sum { k, .. } => (AccessKind::Query, k),
                _ => return None,
            };
            Some(Access { op_index: i as u64, kind, index: index as u64 })
        })
        .collect()
}

/// Runs a sums sequence on `s` and counts answers differing from the expected ones.
pub fn replay_sums<S: PartialSums>(s: &mut S, seq: &OpSequence) -> Result<usize, SumsError> {
    let mut mismatches = 0;
    for op in &seq.ops {
        match *op {
            Op::Update { k, delta } => s.update(k, delta)?,
            Op::Sum { k, expected } => mismatches += usize::from(s.sum(k)? != expected),
            Op::Select { sigma, expected } => mismatches += usize::from(s.select(sigma)? != expected),
            _ => return Err(SumsError::Parameter("graph op in a sums sequence".into())),
        }
    }
    Ok(mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sums::NaivePrefixOracle;
    use crate::timetree::binary_tree_interleaving;

    fn indices(seq: &OpSequence) -> Vec<usize> {
        seq.ops
            .iter()
            .map(|op| match *op {
                Op::Update { k, .. } | Op::Sum { k, .. } => k,
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn fenwick_select() {
        let mut fw = Fenwick::new(8);
        for k in 0..8 {
            fw.add(k, 1);
        }
        assert_eq!(fw.select(5), Some(4));
        assert_eq!(fw.select(1), Some(0));
        assert_eq!(fw.select(9), None);
        fw.add(3, 5);
        assert_eq!(fw.select(4), Some(3));
        assert_eq!(fw.select(9), Some(3));
        assert_eq!(fw.select(10), Some(4));
    }

    #[test]
    fn bitrev_examples() {
        assert_eq!(indices(&bitrev_sequence(2, 4, 1).unwrap()), vec![0, 0, 1, 1]);
        let idx = indices(&bitrev_sequence(8, 4, 1).unwrap());
        let firsts: Vec<usize> = idx.iter().step_by(2).copied().collect();
        assert_eq!(firsts, vec![0, 4, 2, 6, 1, 5, 3, 7]);
        assert!(bitrev_sequence(6, 4, 1).is_err());
    }

    #[test]
    fn bitrev_interleaving_is_half_n_lg_n() {
        for lg in 1..=10u32 {
            let n = 1usize << lg;
            let seq = bitrev_sequence(n, 4, 0).unwrap();
            let total = binary_tree_interleaving(&sum_accesses(&seq), seq.len() as u64);
            assert_eq!(total, (n as u64 / 2) * lg as u64, "n = {n}");
        }
    }

    #[test]
    fn expecteds_match_naive_oracle() {
        let seqs = [
            random_alternating(2000, 64, 5, 3).unwrap(),
            bitrev_sequence(64, 5, 3).unwrap(),
            tradeoff_blocks(40, 4, 3, 64, 5, 3).unwrap(),
            select_mix(2000, 64, 5, 3).unwrap(),
        ];
        for seq in &seqs {
            let mut o = NaivePrefixOracle::plain(seq.header.n, seq.header.delta);
            assert_eq!(replay_sums(&mut o, seq).unwrap(), 0, "{}", seq.header.family);
        }
    }

    #[test]
    fn shapes_and_determinism() {
        assert!(random_alternating(0, 8, 4, 1).unwrap().is_empty());
        assert!(random_alternating(3, 8, 4, 1).is_err());
        assert_eq!(random_alternating(100, 8, 4, 7).unwrap(), random_alternating(100, 8, 4, 7).unwrap());
        assert_ne!(random_alternating(100, 8, 4, 7).unwrap(), random_alternating(100, 8, 4, 8).unwrap());

        let t = tradeoff_blocks(3, 4, 1, 16, 4, 1).unwrap();
        assert_eq!(t.len(), 15);
        assert_eq!(t.ops.iter().filter(|o| matches!(o, Op::Update { .. })).count(), 3);
        let alt = tradeoff_blocks(5, 1, 1, 16, 4, 1).unwrap();
        assert!(alt.ops.iter().step_by(2).all(|o| matches!(o, Op::Update { .. })));
        assert!(alt.ops.iter().skip(1).step_by(2).all(|o| matches!(o, Op::Sum { .. })));
        assert!(tradeoff_blocks(3, 0, 1, 16, 4, 1).is_err());
    }

    #[test]
    fn deltas_stay_in_range() {
        let seq = random_alternating(4000, 32, 3, 5).unwrap();
        for op in &seq.ops {
            if let Op::Update { delta, .. } = op {
                assert!(delta.abs() <= 7);
            }
        }
    }
}
