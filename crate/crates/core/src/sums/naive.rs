use super::{check_delta, check_delta_bits, check_index, PartialSums, SumsError};
use crate::memory::{decode_signed, encode_signed, CellMemory, PlainMemory};

/// Ground truth: `A[i]` in cell `i`; `sum(k)` reads `k + 1` cells.
#[derive(Debug, Clone)]
pub struct NaivePrefixOracle<M = PlainMemory> {
    mem: M,
    base: u64,
    n: usize,
    delta_bits: u32,
}

impl<M: CellMemory> NaivePrefixOracle<M> {
    pub fn new(mut mem: M, n: usize, delta_bits: u32) -> Result<Self, SumsError> {
        check_delta_bits(delta_bits)?;
        let base = mem.alloc(n as u64)?;
        Ok(Self { mem, base, n, delta_bits })
    }

    fn load(&mut self, i: usize) -> Result<i64, SumsError> {
        let bits = self.mem.cell_bits();
        Ok(decode_signed(self.mem.read(self.base + i as u64)?, bits))
    }
}

impl NaivePrefixOracle {
    pub fn plain(n: usize, delta_bits: u32) -> Self {
        Self::new(PlainMemory::new(64).expect("64-bit cells"), n, delta_bits).expect("valid oracle")
    }
}

impl<M: CellMemory> PartialSums for NaivePrefixOracle<M> {
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
        let v = self.load(k)?;
        let bits = self.mem.cell_bits();
        self.mem.write(self.base + k as u64, encode_signed(v + delta, bits)?)?;
        Ok(())
    }

    fn sum(&mut self, k: usize) -> Result<i64, SumsError> {
        check_index(k, self.n)?;
        let mut acc = 0;
        for i in 0..=k {
            acc += self.load(i)?;
        }
        Ok(acc)
    }

    fn select(&mut self, sigma: i64) -> Result<usize, SumsError> {
        if sigma < 1 {
            return Err(SumsError::Domain { sigma });
        }
        let mut acc = 0;
        for i in 0..self.n {
            acc += self.load(i)?;
            if acc >= sigma {
                return Ok(i);
            }
        }
        Err(SumsError::Domain { sigma })
    }

    fn memory(&self) -> &M {
        &self.mem
    }

    fn memory_mut(&mut self) -> &mut M {
        &mut self.mem
    }
}
