//! Separator set systems: families of subsets of `0..u` such that every
//! disjoint pair `(A, B)` with `|A| = a`, `|B| = b` has a member containing
//! `A` and avoiding `B`.
//!
//! Systems are sampled with each element kept independently with
//! probability `a / (a + b)`, then checked by enumerating every pair.

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::SplitMix64;

/// Enumeration budget used by [`build_system`] and [`verify_system`].
pub const DEFAULT_PAIR_CAP: u128 = 1 << 20;

pub const MAX_ATTEMPTS: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeparatorError {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("no verified system after {attempts} attempts")]
    ConstructionFailure { attempts: u32 },
    #[error("invalid query sets: {0}")]
    Input(String),
    #[error("no set in the system separates the given pair")]
    Incomplete,
    #[error("{pairs} pairs exceed the enumeration cap {cap}")]
    Feasibility { pairs: u128, cap: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    pub universe: usize,
    pub a: usize,
    pub b: usize,
    /// Bitsets over `0..universe`, 64 elements per word.
    pub sets: Vec<Vec<u64>>,
    pub seed: u64,
    /// Construction attempts used; zero for hand-built systems.
    pub attempts: u32,
    pub verified: bool,
}

fn words(u: usize) -> usize {
    u.div_ceil(64)
}

fn bitset(u: usize, elems: &[usize]) -> Vec<u64> {
    let mut s = vec![0u64; words(u)];
    for &e in elems {
        s[e / 64] |= 1 << (e % 64);
    }
    s
}

fn contains_all(s: &[u64], mask: &[u64]) -> bool {
    s.iter().zip(mask).all(|(x, m)| x & m == *m)
}

fn disjoint(s: &[u64], mask: &[u64]) -> bool {
    s.iter().zip(mask).all(|(x, m)| x & m == 0)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Number of ordered disjoint pairs with `|A| = a`, `|B| = b`.
pub fn pair_count(a: usize, b: usize, u: usize) -> u128 {
    binomial(u, a) * binomial(u.saturating_sub(a), b)
}

/// `ceil((a+b)^(a+b+1) ln u / (a^a b^b))`.
pub fn system_size(a: usize, b: usize, u: usize) -> usize {
    let (af, bf, s) = (a as f64, b as f64, (a + b) as f64);
    let log = (s + 1.0) * s.ln() + (u as f64).ln().ln() - af * af.ln() - bf * bf.ln();
    log.exp().ceil() as usize
}

impl SetSystem {
    /// A system from explicit member lists.
    pub fn from_sets(universe: usize, a: usize, b: usize, sets: &[Vec<usize>]) -> Result<Self, SeparatorError> {
        if sets.iter().flatten().any(|&e| e >= universe) {
            return Err(SeparatorError::Parameter("set element outside the universe".into()));
        }
        Ok(Self {
            universe,
            a,
            b,
            sets: sets.iter().map(|s| bitset(universe, s)).collect(),
            seed: 0,
            attempts: 0,
            verified: false,
        })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn members(&self, i: usize) -> Vec<usize> {
        (0..self.universe).filter(|&e| self.sets[i][e / 64] >> (e % 64) & 1 == 1).collect()
    }

    /// `lg |S| / (lg lg u + lg C(a+b, a))`, the constant in the size bound.
    pub fn size_constant(&self) -> f64 {
        let denom = (self.universe as f64).log2().log2() + (binomial(self.a + self.b, self.a) as f64).log2();
        (self.len() as f64).log2() / denom
    }
}

fn check_params(a: usize, b: usize, u: usize) -> Result<(), SeparatorError> {
    if a == 0 || b == 0 {
        return Err(SeparatorError::Parameter("a and b must be at least 1".into()));
    }
    if a + b > u {
        return Err(SeparatorError::Parameter(format!("a + b = {} exceeds u = {u}", a + b)));
    }
    Ok(())
}

fn sample(a: usize, b: usize, u: usize, seed: u64, attempt: u32) -> SetSystem {
    let mut rng = SplitMix64::stream(seed, attempt as u64);
    let sets = (0..system_size(a, b, u))
        .map(|_| {
            let elems: Vec<usize> = (0..u).filter(|_| rng.below((a + b) as u64) < a as u64).collect();
            bitset(u, &elems)
        })
        .collect();
    SetSystem { universe: u, a, b, sets, seed, attempts: attempt + 1, verified: false }
}

pub fn build_system(a: usize, b: usize, u: usize, seed: u64) -> Result<SetSystem, SeparatorError> {
    build_system_with_cap(a, b, u, seed, DEFAULT_PAIR_CAP)
}

/// Samples systems until one verifies; attempt `i` draws from substream `i`.
/// When the pair count exceeds `cap` the first sample is returned unverified.
pub fn build_system_with_cap(a: usize, b: usize, u: usize, seed: u64, cap: u128) -> Result<SetSystem, SeparatorError> {
    check_params(a, b, u)?;
    if pair_count(a, b, u) > cap {
        return Ok(sample(a, b, u, seed, 0));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut sys = sample(a, b, u, seed, attempt);
        if verify_system_with_cap(&sys, cap)? {
            sys.verified = true;
            return Ok(sys);
        }
    }
    Err(SeparatorError::ConstructionFailure { attempts: MAX_ATTEMPTS })
}

pub fn verify_system(sys: &SetSystem) -> Result<bool, SeparatorError> {
    verify_system_with_cap(sys, DEFAULT_PAIR_CAP)
}

/// True iff every disjoint `(A, B)` with `|A| = a`, `|B| = b` is separated.
pub fn verify_system_with_cap(sys: &SetSystem, cap: u128) -> Result<bool, SeparatorError> {
    let (a, b, u) = (sys.a, sys.b, sys.universe);
    if a + b > u {
        return Ok(true);
    }
    let pairs = pair_count(a, b, u);
    if pairs > cap {
        return Err(SeparatorError::Feasibility { pairs, cap });
    }
    let firsts: Vec<Vec<usize>> = (0..u).combinations(a).collect();
    Ok(firsts.par_iter().all(|aset| {
        let amask = bitset(u, aset);
        let holders: Vec<&Vec<u64>> = sys.sets.iter().filter(|s| contains_all(s, &amask)).collect();
        if holders.is_empty() {
            return false;
        }
        (0..u).filter(|e| !aset.contains(e)).combinations(b).all(|bset| {
            let bmask = bitset(u, &bset);
            holders.iter().any(|s| disjoint(s, &bmask))
        })
    }))
}

/// Index of the first set containing all of `a_set` and none of `b_set`.
///
/// Undersized sets could be padded with the smallest unused elements to a
/// full-size pair, whose separator also separates the original; searching
/// for the original pair directly therefore never misses on a verified
/// system and returns the smallest valid index.
pub fn find_separator(sys: &SetSystem, a_set: &[usize], b_set: &[usize]) -> Result<usize, SeparatorError> {
    if a_set.len() > sys.a || b_set.len() > sys.b {
        return Err(SeparatorError::Input(format!(
            "sizes {}, {} exceed bounds {}, {}",
            a_set.len(),
            b_set.len(),
            sys.a,
            sys.b
        )));
    }
    if let Some(&e) = a_set.iter().chain(b_set).find(|&&e| e >= sys.universe) {
        return Err(SeparatorError::Input(format!("element {e} outside the universe")));
    }
    if a_set.iter().any(|e| b_set.contains(e)) {
        return Err(SeparatorError::Input("sets overlap".into()));
    }
    let amask = bitset(sys.universe, a_set);
    let bmask = bitset(sys.universe, b_set);
    sys.sets
        .iter()
        .position(|s| contains_all(s, &amask) && disjoint(s, &bmask))
        .ok_or(SeparatorError::Incomplete)
}
