use super::{check_delta, check_delta_bits, check_index, digits, height_for, PartialSums, SumsError};
use crate::memory::CellMemory;
use crate::packed::{ArrayMode, PackedLayout, PackedSmallArray, SuccessorStrategy};

/// A `B`-ary tree whose every node is a [`PackedSmallArray`] over its
/// children's totals. Updates and sums touch O(1) cells per level.
#[derive(Debug, Clone)]
pub struct PackedTree<M> {
    mem: M,
    n: usize,
    branching: usize,
    height: usize,
    delta_bits: u32,
    mode: ArrayMode,
    nodes: Vec<PackedSmallArray>,
    level_start: Vec<usize>,
    selects: u64,
    audit_violations: u64,
}

impl<M: CellMemory> PackedTree<M> {
    /// Uses the largest branching factor whose node layout fits one cell.
    pub fn new(
        mem: M,
        n: usize,
        delta_bits: u32,
        mode: ArrayMode,
        strategy: SuccessorStrategy,
    ) -> Result<Self, SumsError> {
        check_delta_bits(delta_bits)?;
        let word = mem.cell_bits().min(128);
        let word = if word >= 128 { 128 } else { 64 };
        let b = PackedLayout::largest_fields(delta_bits, mode, word).ok_or_else(|| {
            SumsError::Parameter(format!("no {word}-bit layout for delta {delta_bits} in {mode:?}"))
        })?;
        Self::with_branching(mem, n, b, delta_bits, mode, strategy)
    }

    pub fn with_branching(
        mut mem: M,
        n: usize,
        branching: usize,
        delta_bits: u32,
        mode: ArrayMode,
        strategy: SuccessorStrategy,
    ) -> Result<Self, SumsError> {
        if n == 0 {
            return Err(SumsError::Parameter("empty array".into()));
        }
        if branching < 2 {
            return Err(SumsError::Parameter(format!("branching factor {branching} < 2")));
        }
        check_delta_bits(delta_bits)?;
        let word = if mem.cell_bits() >= 128 { 128 } else { 64 };
        let layout = PackedLayout::for_mode(branching, delta_bits, mode, word)?;
        let height = height_for(n, branching);
        let mut nodes = Vec::new();
        let mut level_start = Vec::with_capacity(height);
        let mut count = 1usize;
        for _ in 0..height {
            level_start.push(nodes.len());
            for _ in 0..count {
                nodes.push(PackedSmallArray::new(&mut mem, layout, mode, strategy)?);
            }
            count *= branching;
        }
        Ok(Self {
            mem,
            n,
            branching,
            height,
            delta_bits,
            mode,
            nodes,
            level_start,
            selects: 0,
            audit_violations: 0,
        })
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mode(&self) -> ArrayMode {
        self.mode
    }

    /// Selects answered so far, and how many resolved outside their
    /// three-candidate set at some level.
    pub fn audit_counts(&self) -> (u64, u64) {
        (self.selects, self.audit_violations)
    }

    /// True when every node's `T` word has clean padding bits.
    pub fn padding_clean(&self) -> Result<bool, SumsError> {
        for node in &self.nodes {
            if !node.padding_clean(&self.mem)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn node(&self, level: usize, j: usize) -> &PackedSmallArray {
        &self.nodes[self.level_start[level] + j]
    }
}

impl<M: CellMemory> PartialSums for PackedTree<M> {
    type Memory = M;

    fn len(&self) -> usize {
        self.n
    }

    fn delta_bits(&self) -> u32 {
        self.delta_bits
    }

    fn update(&mut self, k: usize, delta: i64) -> Result<(), SumsError> {
        check_index(k, self.n)?;
        check_delta(delta, self.delta_bits)?;
        let mut j = 0;
        for (level, c) in digits(k, self.branching, self.height).into_iter().enumerate() {
            let node = &self.nodes[self.level_start[level] + j];
            node.update(&mut self.mem, c, delta)?;
            j = j * self.branching + c;
        }
        Ok(())
    }

    fn sum(&mut self, k: usize) -> Result<i64, SumsError> {
        check_index(k, self.n)?;
        let mut acc = 0;
        let mut j = 0;
        let bottom = self.height - 1;
        for (level, c) in digits(k, self.branching, self.height).into_iter().enumerate() {
            let node = &self.nodes[self.level_start[level] + j];
            if level == bottom {
                acc += node.sum(&mut self.mem, c)?;
            } else if c > 0 {
                acc += node.sum(&mut self.mem, c - 1)?;
            }
            j = j * self.branching + c;
        }
        Ok(acc)
    }

    fn select(&mut self, sigma: i64) -> Result<usize, SumsError> {
        if self.mode != ArrayMode::SelectEnabled {
            return Err(SumsError::Mode);
        }
        if sigma < 1 {
            return Err(SumsError::Domain { sigma });
        }
        let mut rest = sigma;
        let mut j = 0;
        let mut clean = true;
        for level in 0..self.height {
            let node = self.node(level, j).clone();
            let out = node.select(&mut self.mem, rest).map_err(|e| match SumsError::from(e) {
                SumsError::Domain { .. } => SumsError::Domain { sigma },
                other => other,
            })?;
            clean &= out.audit.within_candidates();
            rest -= out.prefix_before;
            j = j * self.branching + out.index;
        }
        self.selects += 1;
        if !clean {
            self.audit_violations += 1;
        }
        if j >= self.n {
            return Err(SumsError::Domain { sigma });
        }
        Ok(j)
    }

    fn memory(&self) -> &M {
        &self.mem
    }

    fn memory_mut(&mut self) -> &mut M {
        &mut self.mem
    }
}
