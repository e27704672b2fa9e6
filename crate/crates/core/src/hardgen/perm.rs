use super::GenError;

/// A bijection on `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, GenError> {
        let mut seen = vec![false; map.len()];
        for &x in &map {
            if x >= map.len() || std::mem::replace(&mut seen[x], true) {
                return Err(GenError::Parameter(format!("not a bijection: {map:?}")));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(m: usize) -> Self {
        Self { map: (0..m).collect() }
    }

    /// `i -> (i + shift) mod m`.
    pub fn cyclic_shift(m: usize, shift: usize) -> Self {
        Self { map: (0..m).map(|i| (i + shift) % m).collect() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &Permutation) -> Permutation {
        Permutation { map: self.map.iter().map(|&i| next.map[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }
}

/// Bit reversal on `k`-bit integers, built by the doubling recursion
/// `pi'(i) = 2 pi(i)`, `pi'(i + m) = 2 pi(i) + 1`.
pub fn bitrev_perm(k: u32) -> Permutation {
    let mut map = vec![0usize];
    for _ in 0..k {
        let mut next: Vec<usize> = map.iter().map(|&p| 2 * p).collect();
        next.extend(map.iter().map(|&p| 2 * p + 1));
        map = next;
    }
    Permutation { map }
}
