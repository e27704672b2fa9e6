use super::{bitrev_perm, GenError, Op, OpSequence, Permutation, SequenceHeader};
use crate::rng::SplitMix64;

/// Order in which blocks pick the box they rewire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoxOrder {
    /// Block `i` rewires box `bitrev(i)`; each box at most once.
    Bitrev,
    /// Each block rewires a uniformly random box.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryMode {
    /// After each block: a random column `x`, then one query per wire
    /// checking `(0, y)` against `(x, compose_prefix(x)(y))`.
    Macro,
    /// After each block: `queries_per_block` queries, each a random
    /// first-column node against the node on its path in a random column.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermBoxParams {
    pub side: usize,
    pub blocks: usize,
    pub queries_per_block: usize,
    pub box_order: BoxOrder,
    pub query_mode: QueryMode,
    /// Start from random boxes instead of identity boxes.
    pub random_initial: bool,
    pub seed: u64,
}

impl PermBoxParams {
    pub fn new(side: usize, blocks: usize, seed: u64) -> Self {
        Self {
            side,
            blocks,
            queries_per_block: side,
            box_order: BoxOrder::Uniform,
            query_mode: QueryMode::Macro,
            random_initial: true,
            seed,
        }
    }
}

/// A grid of `side + 1` columns of `side` points; box `x` wires column `x`
/// to column `x + 1` by joining `(x, y)` with `(x + 1, boxes[x](y))`.
/// Point `(x, y)` is vertex `x * side + y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermBoxInstance {
    pub side: usize,
    pub boxes: Vec<Permutation>,
}

impl PermBoxInstance {
    pub fn identity(side: usize) -> Self {
        Self { side, boxes: vec![Permutation::identity(side); side] }
    }

    pub fn num_vertices(&self) -> usize {
        (self.side + 1) * self.side
    }

    pub fn vertex(&self, x: usize, y: usize) -> usize {
        x * self.side + y
    }

    pub fn box_edges(&self, x: usize) -> Vec<(usize, usize)> {
        (0..self.side).map(|y| (self.vertex(x, y), self.vertex(x + 1, self.boxes[x].apply(y)))).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.side).flat_map(|x| self.box_edges(x)).collect()
    }
}

/// Boxes `0..x` composed in wire order: where each first-column row sits in column `x`.
pub fn compose_prefix(inst: &PermBoxInstance, x: usize) -> Permutation {
    inst.boxes[..x.min(inst.side)]
        .iter()
        .fold(Permutation::identity(inst.side), |acc, p| acc.then(p))
}

/// A generated sequence plus the instance after each block (index 0 is the
/// initial instance).
#[derive(Debug, Clone)]
pub struct PermBoxRun {
    pub sequence: OpSequence,
    pub states: Vec<PermBoxInstance>,
}

pub fn permbox_run(params: &PermBoxParams) -> Result<PermBoxRun, GenError> {
    let side = params.side;
    if side == 0 {
        return Err(GenError::Parameter("side must be positive".into()));
    }
    let order = match params.box_order {
        BoxOrder::Bitrev => {
            if !side.is_power_of_two() {
                return Err(GenError::Parameter(format!("bitrev order needs a power-of-two side, got {side}")));
            }
            if params.blocks > side {
                return Err(GenError::Parameter(format!(
                    "bitrev order allows at most {side} blocks, got {}",
                    params.blocks
                )));
            }
            Some(bitrev_perm(side.trailing_zeros()))
        }
        BoxOrder::Uniform => None,
    };

    let mut inst = PermBoxInstance::identity(side);
    if params.random_initial {
        let mut rng = SplitMix64::stream(params.seed, 0);
        for b in inst.boxes.iter_mut() {
            *b = Permutation::new(rng.permutation(side)).expect("shuffle is a bijection");
        }
    }
    let mut ops: Vec<Op> = inst.edges().into_iter().map(|(u, v)| Op::Insert { u, v }).collect();
    let mut states = vec![inst.clone()];

    for block in 0..params.blocks {
        let mut rng = SplitMix64::stream(params.seed, block as u64 + 1);
        let x = match &order {
            Some(p) => p.apply(block),
            None => rng.below(side as u64) as usize,
        };
        ops.extend(inst.box_edges(x).into_iter().map(|(u, v)| Op::Delete { u, v }));
        inst.boxes[x] = Permutation::new(rng.permutation(side)).expect("shuffle is a bijection");
        ops.extend(inst.box_edges(x).into_iter().map(|(u, v)| Op::Insert { u, v }));

        match params.query_mode {
            QueryMode::Macro => {
                let col = 1 + rng.below(side as u64) as usize;
                let pi = compose_prefix(&inst, col);
                for y in 0..side {
                    ops.push(Op::Connected { u: inst.vertex(0, y), v: inst.vertex(col, pi.apply(y)), expected: true });
                }
            }
            QueryMode::Random => {
                for _ in 0..params.queries_per_block {
                    let y = rng.below(side as u64) as usize;
                    let col = 1 + rng.below(side as u64) as usize;
                    let target = compose_prefix(&inst, col).apply(y);
                    ops.push(Op::Connected { u: inst.vertex(0, y), v: inst.vertex(col, target), expected: true });
                }
            }
        }
        states.push(inst.clone());
    }

    let family = match params.box_order {
        BoxOrder::Bitrev => "permbox-bitrev",
        BoxOrder::Uniform => "permbox",
    };
    let header = SequenceHeader {
        family: family.into(),
        n: inst.num_vertices(),
        delta: 0,
        seed: params.seed,
        side: Some(side),
    };
    Ok(PermBoxRun { sequence: OpSequence { header, ops }, states })
}

pub fn permbox_sequence(params: &PermBoxParams) -> Result<OpSequence, GenError> {
    Ok(permbox_run(params)?.sequence)
}
