use super::layout::{ceil_lg, required_field_bits};
use super::{ArrayMode, PackedError, PackedLayout, SuccessorStrategy};
use crate::memory::{decode_signed, encode_signed, CellMemory, Word};

/// Partial sums over `B` elements kept as `S[i] = V[i] + T[i]`.
///
/// `T` is one packed word; every update adds its delta to a suffix of `T`
/// with a single broadcast. `V` lives in `B` cells and only changes when a
/// `T` entry is folded into it (Dietz rotation in sum-only mode, periodic
/// global rebuild in select-enabled mode).
///
/// Cell map, in allocation order: `T` (with the update counter in its
/// spare high bits when they fit, otherwise in the next cell), `V[0..B]`,
/// then for select-enabled arrays the packed `rep` and `len` tables and,
/// with [`SuccessorStrategy::BroadcastCompare`], the packed copy of `V`.
/// All-zero cells are the valid state of an all-zero array, so a fresh
/// allocation needs no initialisation probes.
#[derive(Debug, Clone)]
pub struct PackedSmallArray {
    layout: PackedLayout,
    mode: ArrayMode,
    strategy: SuccessorStrategy,
    cell_bits: u32,
    t_addr: u64,
    meta_addr: Option<u64>,
    v_addr: u64,
    rep_addr: u64,
    len_addr: u64,
    index: Option<(u64, PackedLayout)>,
    counter_bits: u32,
    entry_bits: u32,
}

#[derive(Debug, Clone, Copy, Default)]
struct Meta {
    counter: u64,
    nonmonotone: bool,
}

/// Which element positions a select looked at while resolving its answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectAudit {
    /// Index of the successor of sigma among the `V` values (`B` if none).
    pub successor: usize,
    /// The run ending just before the successor, the run starting at it, and
    /// the element right after that run.
    pub candidates: Vec<usize>,
    pub inspected: Vec<usize>,
}

impl SelectAudit {
    pub fn within_candidates(&self) -> bool {
        self.inspected.iter().all(|i| self.candidates.contains(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectOutcome {
    pub index: usize,
    /// `S[index - 1]`, zero for index 0.
    pub prefix_before: i64,
    pub audit: SelectAudit,
}

/// Unprobed view of an array's state, for checks and debugging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArraySnapshot {
    pub v: Vec<i64>,
    pub t: Vec<i64>,
    pub t_word: Word,
    pub rep: Vec<usize>,
    pub len: Vec<usize>,
    pub counter: u64,
    pub nonmonotone: bool,
}

impl ArraySnapshot {
    pub fn prefix_sums(&self) -> Vec<i64> {
        self.v.iter().zip(&self.t).map(|(v, t)| v + t).collect()
    }
}

impl PackedSmallArray {
    pub fn new<M: CellMemory>(
        mem: &mut M,
        layout: PackedLayout,
        mode: ArrayMode,
        strategy: SuccessorStrategy,
    ) -> Result<Self, PackedError> {
        let b = layout.fields();
        let delta = layout
            .delta_bits()
            .ok_or_else(|| PackedError::Layout("layout has no update width".into()))?;
        if layout.field_bits() < required_field_bits(b, delta, mode) {
            return Err(PackedError::Layout(format!(
                "{}-bit fields too narrow for {mode:?} with delta {delta}",
                layout.field_bits()
            )));
        }
        let cell_bits = mem.cell_bits();
        if cell_bits < 64 || cell_bits < layout.word_bits() {
            return Err(PackedError::Layout(format!(
                "{cell_bits}-bit cells cannot hold {}-bit words and 64-bit values",
                layout.word_bits()
            )));
        }
        let lg = ceil_lg(b as u64);
        let (counter_bits, meta_bits) = match mode {
            ArrayMode::SumOnly => (lg, lg),
            ArrayMode::SelectEnabled => (4 * lg, 4 * lg + 1),
        };
        let meta_in_t = layout.used_bits() + meta_bits <= layout.word_bits();
        let index_layout = match (mode, strategy) {
            (ArrayMode::SelectEnabled, SuccessorStrategy::BroadcastCompare) => {
                let slot = (layout.word_bits() - 1) / b as u32;
                let g = slot.saturating_sub(1).min(64);
                Some(PackedLayout::new(b, g, layout.word_bits()).map_err(|_| {
                    PackedError::Layout(format!("no room for a packed successor index with B={b}"))
                })?)
            }
            _ => None,
        };
        let select = mode == ArrayMode::SelectEnabled;
        let cells = 1
            + u64::from(!meta_in_t)
            + b as u64
            + if select { 2 } else { 0 }
            + u64::from(index_layout.is_some());
        let base = mem.alloc(cells)?;
        let mut next = base + 1;
        let meta_addr = (!meta_in_t).then(|| {
            next += 1;
            next - 1
        });
        let v_addr = next;
        next += b as u64;
        let (rep_addr, len_addr) = (next, next + 1);
        if select {
            next += 2;
        }
        Ok(Self {
            layout,
            mode,
            strategy,
            cell_bits,
            t_addr: base,
            meta_addr,
            v_addr,
            rep_addr,
            len_addr,
            index: index_layout.map(|l| (next, l)),
            counter_bits,
            entry_bits: lg.max(1),
        })
    }

    pub fn layout(&self) -> &PackedLayout {
        &self.layout
    }

    pub fn mode(&self) -> ArrayMode {
        self.mode
    }

    pub fn strategy(&self) -> SuccessorStrategy {
        self.strategy
    }

    pub fn len(&self) -> usize {
        self.layout.fields()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Updates allowed between two global rebuilds.
    pub fn rebuild_period(&self) -> u64 {
        (self.len() as u64).pow(4)
    }

    /// Minimum gap between runs right after a rebuild: `B^4 * 2^delta`.
    pub fn run_gap(&self) -> i64 {
        (self.rebuild_period() as i64) << self.layout.delta_bits().unwrap_or(0)
    }

    fn t_mask(&self) -> Word {
        let used = self.layout.used_bits();
        if used >= 128 {
            Word::MAX
        } else {
            (1 << used) - 1
        }
    }

    fn decode_meta(&self, raw: Word) -> Meta {
        Meta {
            counter: (raw & ((1 << self.counter_bits) - 1)) as u64,
            nonmonotone: self.mode == ArrayMode::SelectEnabled && (raw >> self.counter_bits) & 1 == 1,
        }
    }

    fn encode_meta(&self, meta: Meta) -> Word {
        meta.counter as Word | (Word::from(meta.nonmonotone) << self.counter_bits)
    }

    fn split_state(&self, t_cell: Word, meta_cell: Option<Word>) -> (Word, Meta) {
        match meta_cell {
            Some(m) => (t_cell, self.decode_meta(m)),
            None => (t_cell & self.t_mask(), self.decode_meta(t_cell >> self.layout.used_bits())),
        }
    }

    fn read_state<M: CellMemory>(&self, mem: &mut M) -> Result<(Word, Meta), PackedError> {
        let t = mem.read(self.t_addr)?;
        let m = match self.meta_addr {
            Some(a) => Some(mem.read(a)?),
            None => None,
        };
        Ok(self.split_state(t, m))
    }

    fn write_state<M: CellMemory>(&self, mem: &mut M, t: Word, meta: Meta) -> Result<(), PackedError> {
        match self.meta_addr {
            Some(a) => {
                mem.write(self.t_addr, t)?;
                mem.write(a, self.encode_meta(meta))?;
            }
            None => {
                mem.write(self.t_addr, t | (self.encode_meta(meta) << self.layout.used_bits()))?;
            }
        }
        Ok(())
    }

    fn read_v<M: CellMemory>(&self, mem: &mut M, i: usize) -> Result<i64, PackedError> {
        Ok(decode_signed(mem.read(self.v_addr + i as u64)?, self.cell_bits))
    }

    fn write_v<M: CellMemory>(&self, mem: &mut M, i: usize, v: i64) -> Result<(), PackedError> {
        mem.write(self.v_addr + i as u64, encode_signed(v, self.cell_bits)?)?;
        Ok(())
    }

    fn cached_v<M: CellMemory>(
        &self,
        mem: &mut M,
        cache: &mut [Option<i64>],
        i: usize,
    ) -> Result<i64, PackedError> {
        if let Some(v) = cache[i] {
            return Ok(v);
        }
        let v = self.read_v(mem, i)?;
        cache[i] = Some(v);
        Ok(v)
    }

    fn pack_entries(&self, entries: &[usize]) -> Word {
        entries
            .iter()
            .enumerate()
            .fold(0, |w, (i, &e)| w | ((e as Word) << (i as u32 * self.entry_bits)))
    }

    fn unpack_entries(&self, word: Word) -> Vec<usize> {
        let mask = (1 << self.entry_bits) - 1;
        (0..self.len()).map(|i| ((word >> (i as u32 * self.entry_bits)) & mask) as usize).collect()
    }

    // len is stored as B - len so the all-zero cell means one run over everything
    fn decode_len(&self, word: Word) -> Vec<usize> {
        self.unpack_entries(word).into_iter().map(|x| self.len() - x).collect()
    }

    fn check_delta(&self, delta: i64) -> Result<(), PackedError> {
        let bits = self.layout.delta_bits().unwrap_or(0);
        if delta.unsigned_abs() >= 1u64 << bits {
            return Err(PackedError::Encoding(format!("|{delta}| >= 2^{bits}")));
        }
        Ok(())
    }

    /// `A[i] += delta`.
    pub fn update<M: CellMemory>(&self, mem: &mut M, i: usize, delta: i64) -> Result<(), PackedError> {
        if i >= self.len() {
            return Err(PackedError::Range { index: i, len: self.len() });
        }
        self.check_delta(delta)?;
        let (t, mut meta) = self.read_state(mem)?;
        let mut t = self.layout.broadcast_suffix_add(t, i, delta)?;
        match self.mode {
            ArrayMode::SumOnly => {
                let r = meta.counter as usize % self.len();
                let pending = self.layout.get(t, r);
                if pending != 0 {
                    let v = self.read_v(mem, r)?;
                    self.write_v(mem, r, v + pending)?;
                    t = self.layout.set(t, r, 0)?;
                }
                meta.counter = ((r + 1) % self.len()) as u64;
                self.write_state(mem, t, meta)
            }
            ArrayMode::SelectEnabled => {
                meta.counter += 1;
                if meta.counter >= self.rebuild_period() {
                    self.rebuild_from(mem, t).map(|_| ())
                } else {
                    self.write_state(mem, t, meta)
                }
            }
        }
    }

    /// `S[k]`: one probe of `V[k]` and one of `T`.
    pub fn sum<M: CellMemory>(&self, mem: &mut M, k: usize) -> Result<i64, PackedError> {
        if k >= self.len() {
            return Err(PackedError::Range { index: k, len: self.len() });
        }
        let v = self.read_v(mem, k)?;
        let (t, _) = self.read_state(mem)?;
        Ok(v + self.layout.get(t, k))
    }

    /// Folds `T` into `V`. Select-enabled arrays split the sums into runs
    /// whose consecutive gaps are in `[0, B^4 * 2^delta)` and store run
    /// offsets in `T`; sum-only arrays fold `T` completely.
    pub fn rebuild<M: CellMemory>(&self, mem: &mut M) -> Result<(), PackedError> {
        let (t, _) = self.read_state(mem)?;
        self.rebuild_from(mem, t).map(|_| ())
    }

    // Returns the new T word and V values.
    fn rebuild_from<M: CellMemory>(&self, mem: &mut M, t: Word) -> Result<(Word, Vec<i64>), PackedError> {
        let b = self.len();
        let mut sums = Vec::with_capacity(b);
        for i in 0..b {
            sums.push(self.read_v(mem, i)? + self.layout.get(t, i));
        }
        let monotone = sums.windows(2).all(|w| w[0] <= w[1]);
        let (rep, len) = match self.mode {
            ArrayMode::SumOnly => ((0..b).collect::<Vec<_>>(), vec![1; b]),
            ArrayMode::SelectEnabled => split_runs(&sums, self.run_gap()),
        };
        let new_v: Vec<i64> = (0..b).map(|i| sums[rep[i]]).collect();
        let offsets: Vec<i64> = (0..b).map(|i| sums[i] - new_v[i]).collect();
        let new_t = self.layout.pack(&offsets)?;
        for (i, &v) in new_v.iter().enumerate() {
            self.write_v(mem, i, v)?;
        }
        self.write_state(mem, new_t, Meta { counter: 0, nonmonotone: !monotone })?;
        if self.mode == ArrayMode::SelectEnabled {
            mem.write(self.rep_addr, self.pack_entries(&rep))?;
            let stored: Vec<usize> = len.iter().map(|&l| b - l).collect();
            mem.write(self.len_addr, self.pack_entries(&stored))?;
            if let Some((addr, idx)) = &self.index {
                let bound = 1i64 << (idx.field_bits() - 2).min(62);
                let word = if new_v.iter().all(|v| v.abs() < bound) {
                    idx.pack(&new_v)?
                } else {
                    1 << (idx.word_bits() - 1)
                };
                mem.write(*addr, word)?;
            }
        }
        Ok((new_t, new_v))
    }

    fn successor<M: CellMemory>(
        &self,
        mem: &mut M,
        sigma: i64,
        cache: &mut [Option<i64>],
    ) -> Result<usize, PackedError> {
        if let Some((addr, idx)) = &self.index {
            let word = mem.read(*addr)?;
            if word >> (idx.word_bits() - 1) & 1 == 0 {
                return Ok(idx.count_less_than(word, sigma, 0, self.len() - 1));
            }
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.cached_v(mem, cache, mid)? >= sigma {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    /// Smallest `i` with `S[i] >= sigma`, for `1 <= sigma <= S[B-1]` and
    /// nondecreasing `S`.
    ///
    /// After locating the successor `k` of sigma in `V`, only three places
    /// can hold the answer: the run ending at `k-1`, the run starting at
    /// `k`, and the element `k + len(k)`. Two prefix sums decide which; inside
    /// a run the answer is found by comparing `sigma - V[rep]` against all of
    /// `T` at once.
    pub fn select<M: CellMemory>(&self, mem: &mut M, sigma: i64) -> Result<SelectOutcome, PackedError> {
        if self.mode != ArrayMode::SelectEnabled {
            return Err(PackedError::Mode);
        }
        if sigma < 1 {
            return Err(PackedError::Domain { sigma });
        }
        let b = self.len();
        let mut cache = vec![None; b];
        let (mut t, meta) = self.read_state(mem)?;
        if meta.nonmonotone {
            // runs were cut while some element was non-positive; re-cut them now
            let (nt, nv) = self.rebuild_from(mem, t)?;
            t = nt;
            cache = nv.into_iter().map(Some).collect();
        }
        let k = self.successor(mem, sigma, &mut cache)?;
        let rep = self.unpack_entries(mem.read(self.rep_addr)?);
        let len = self.decode_len(mem.read(self.len_addr)?);

        let mut candidates = Vec::new();
        if k > 0 {
            candidates.extend(rep[k - 1]..k);
        }
        if k < b {
            candidates.extend(k..(k + len[k]).min(b));
            if k + len[k] < b {
                candidates.push(k + len[k]);
            }
        }
        let mut inspected = Vec::new();
        let mut prefix = |i: usize, inspected: &mut Vec<usize>, mem: &mut M| -> Result<i64, PackedError> {
            inspected.push(i);
            Ok(self.cached_v(mem, &mut cache, i)? + self.layout.get(t, i))
        };

        let run = if k == b {
            if prefix(b - 1, &mut inspected, mem)? < sigma {
                return Err(PackedError::Domain { sigma });
            }
            (rep[b - 1], b - 1)
        } else if k > 0 && prefix(k - 1, &mut inspected, mem)? >= sigma {
            (rep[k - 1], k - 1)
        } else {
            let end = k + len[k] - 1;
            let s_end = prefix(end, &mut inspected, mem)?;
            if s_end < sigma {
                let next = end + 1;
                if next >= b || prefix(next, &mut inspected, mem)? < sigma {
                    return Err(PackedError::Domain { sigma });
                }
                let audit = SelectAudit { successor: k, candidates, inspected };
                return Ok(SelectOutcome { index: next, prefix_before: s_end, audit });
            }
            (k, end)
        };

        let (lo, hi) = run;
        let base = self.cached_v(mem, &mut cache, lo)?;
        let index = lo + self.layout.count_less_than(t, sigma - base, lo, hi);
        inspected.extend(lo..=hi);
        if index > hi {
            return Err(PackedError::Domain { sigma });
        }
        let prefix_before = if index == 0 {
            0
        } else if index > lo {
            base + self.layout.get(t, index - 1)
        } else {
            self.cached_v(mem, &mut cache, index - 1)? + self.layout.get(t, index - 1)
        };
        let audit = SelectAudit { successor: k, candidates, inspected };
        Ok(SelectOutcome { index, prefix_before, audit })
    }

    pub fn snapshot<M: CellMemory>(&self, mem: &M) -> Result<ArraySnapshot, PackedError> {
        let t_cell = mem.peek(self.t_addr)?;
        let meta_cell = match self.meta_addr {
            Some(a) => Some(mem.peek(a)?),
            None => None,
        };
        let (t_word, meta) = self.split_state(t_cell, meta_cell);
        let mut v = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            v.push(decode_signed(mem.peek(self.v_addr + i as u64)?, self.cell_bits));
        }
        let (rep, len) = if self.mode == ArrayMode::SelectEnabled {
            (
                self.unpack_entries(mem.peek(self.rep_addr)?),
                self.decode_len(mem.peek(self.len_addr)?),
            )
        } else {
            ((0..self.len()).collect(), vec![1; self.len()])
        };
        Ok(ArraySnapshot {
            t: self.layout.unpack(t_word),
            v,
            t_word,
            rep,
            len,
            counter: meta.counter,
            nonmonotone: meta.nonmonotone,
        })
    }

    /// Padding bits of `T` (and of the packed successor index) are all zero.
    pub fn padding_clean<M: CellMemory>(&self, mem: &M) -> Result<bool, PackedError> {
        let snap = self.snapshot(mem)?;
        let mut clean = self.layout.is_clean(snap.t_word);
        if let Some((addr, idx)) = &self.index {
            let word = mem.peek(*addr)? & !(1 << (idx.word_bits() - 1));
            clean &= idx.is_clean(word);
        }
        Ok(clean)
    }
}

/// Representative and run length per element; a run continues while the
/// next sum is at least the current one and less than `gap` above it.
fn split_runs(sums: &[i64], gap: i64) -> (Vec<usize>, Vec<usize>) {
    let b = sums.len();
    let mut rep = vec![0; b];
    for i in 1..b {
        let step = sums[i] - sums[i - 1];
        rep[i] = if (0..gap).contains(&step) { rep[i - 1] } else { i };
    }
    let mut len = vec![0; b];
    for &r in &rep {
        len[r] += 1;
    }
    let len = (0..b).map(|i| len[rep[i]]).collect();
    (rep, len)
}
