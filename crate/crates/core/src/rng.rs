//! Deterministic SplitMix64 generator used by every workload generator.
//!
//! The generator is the standard SplitMix64: the state advances by the
//! golden-ratio increment `0x9E3779B97F4A7C15` and each output is the
//! state passed through [`mix64`]. Seeded with 0, the first three outputs
//! are `0xE220A8397B1DCDAF`, `0x6E789E6AA1B965F4`, `0x06C45D188009454F`.
//!
//! Substreams: the stream for index `i` under seed `s` starts from state
//! `s ^ mix64((i + 1) * 0x9E3779B97F4A7C15)` (wrapping arithmetic). Every
//! generator draws one substream per operation (or block), so any op can be
//! regenerated without replaying the ones before it.
//!
//! Bounded draws use the multiply-high reduction
//! `below(m) = (next() * m) >> 64`, which is what other ports must use to
//! reproduce sequences bit for bit.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// The independent substream for `index` under `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        Self::new(seed ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform-ish value in `0..bound` by multiply-high; `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Value in the closed range `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi as i128 - lo as i128 + 1) as u64;
        lo.wrapping_add(self.below(span) as i64)
    }

    /// Fisher-Yates shuffle of `0..m`.
    pub fn permutation(&mut self, m: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            let j = self.below(i as u64 + 1) as usize;
            p.swap(i, j);
        }
        p
    }
}
