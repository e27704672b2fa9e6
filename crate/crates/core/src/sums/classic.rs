use super::{check_delta, check_delta_bits, check_index, digits, height_for, PartialSums, SumsError};
use crate::memory::{decode_signed, encode_signed, CellMemory};

/// Which side of the branching-factor trade-off a [`ClassicTree`] takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassicMode {
    /// Nodes store prefix sums of their children: one read per level for a
    /// query, up to `B` read-modify-writes per level for an update.
    FastQuery,
    /// Nodes store each child's total: one read-modify-write per level for
    /// an update, up to `B` reads per level for a query.
    FastUpdate,
}

/// The folklore `B`-ary augmented tree, one aggregate per cell.
///
/// Leaves are padded to `B^h`; node `j` of level `l` owns cells
/// `level_base[l] + j*B .. + B`, one per child.
#[derive(Debug, Clone)]
pub struct ClassicTree<M> {
    mem: M,
    mode: ClassicMode,
    branching: usize,
    n: usize,
    height: usize,
    delta_bits: u32,
    level_base: Vec<u64>,
}

impl<M: CellMemory> ClassicTree<M> {
    pub fn new(
        mut mem: M,
        n: usize,
        branching: usize,
        mode: ClassicMode,
        delta_bits: u32,
    ) -> Result<Self, SumsError> {
        if branching < 2 {
            return Err(SumsError::Parameter(format!("branching factor {branching} < 2")));
        }
        if n == 0 {
            return Err(SumsError::Parameter("empty array".into()));
        }
        check_delta_bits(delta_bits)?;
        let height = height_for(n, branching);
        let mut level_base = Vec::with_capacity(height);
        let mut nodes = 1u64;
        for _ in 0..height {
            level_base.push(mem.alloc(nodes * branching as u64)?);
            nodes *= branching as u64;
        }
        Ok(Self { mem, mode, branching, n, height, delta_bits, level_base })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn mode(&self) -> ClassicMode {
        self.mode
    }

    fn addr(&self, level: usize, node: usize, child: usize) -> u64 {
        self.level_base[level] + (node * self.branching + child) as u64
    }

    fn load(&mut self, addr: u64) -> Result<i64, SumsError> {
        let bits = self.mem.cell_bits();
        Ok(decode_signed(self.mem.read(addr)?, bits))
    }

    fn add(&mut self, addr: u64, delta: i64) -> Result<(), SumsError> {
        let v = self.load(addr)?;
        let bits = self.mem.cell_bits();
        self.mem.write(addr, encode_signed(v + delta, bits)?)?;
        Ok(())
    }
}

impl<M: CellMemory> PartialSums for ClassicTree<M> {
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
        let mut node = 0;
        for (level, c) in digits(k, self.branching, self.height).into_iter().enumerate() {
            let children = match self.mode {
                ClassicMode::FastUpdate => c..c + 1,
                ClassicMode::FastQuery => c..self.branching,
            };
            for child in children {
                self.add(self.addr(level, node, child), delta)?;
            }
            node = node * self.branching + c;
        }
        Ok(())
    }

    fn sum(&mut self, k: usize) -> Result<i64, SumsError> {
        check_index(k, self.n)?;
        let mut acc = 0;
        let mut node = 0;
        let bottom = self.height - 1;
        for (level, c) in digits(k, self.branching, self.height).into_iter().enumerate() {
            // children strictly left of the path, plus the leaf itself at the bottom
            let upto = if level == bottom { c + 1 } else { c };
            match self.mode {
                ClassicMode::FastUpdate => {
                    for child in 0..upto {
                        acc += self.load(self.addr(level, node, child))?;
                    }
                }
                ClassicMode::FastQuery => {
                    if upto > 0 {
                        acc += self.load(self.addr(level, node, upto - 1))?;
                    }
                }
            }
            node = node * self.branching + c;
        }
        Ok(acc)
    }

    fn select(&mut self, sigma: i64) -> Result<usize, SumsError> {
        if sigma < 1 {
            return Err(SumsError::Domain { sigma });
        }
        let mut rest = sigma;
        let mut node = 0;
        for level in 0..self.height {
            let chosen = match self.mode {
                ClassicMode::FastUpdate => {
                    let mut found = None;
                    for child in 0..self.branching {
                        let v = self.load(self.addr(level, node, child))?;
                        if rest <= v {
                            found = Some(child);
                            break;
                        }
                        rest -= v;
                    }
                    found
                }
                ClassicMode::FastQuery => {
                    let (mut lo, mut hi) = (0, self.branching);
                    while lo < hi {
                        let mid = (lo + hi) / 2;
                        if self.load(self.addr(level, node, mid))? >= rest {
                            hi = mid;
                        } else {
                            lo = mid + 1;
                        }
                    }
                    if lo < self.branching && lo > 0 {
                        rest -= self.load(self.addr(level, node, lo - 1))?;
                    }
                    (lo < self.branching).then_some(lo)
                }
            };
            let c = chosen.ok_or(SumsError::Domain { sigma })?;
            node = node * self.branching + c;
        }
        if node >= self.n {
            return Err(SumsError::Domain { sigma });
        }
        Ok(node)
    }

    fn memory(&self) -> &M {
        &self.mem
    }

    fn memory_mut(&mut self) -> &mut M {
        &mut self.mem
    }
}
