//! Packed words: `B` signed fields, each followed by one zero padding bit.
//!
//! Field `i` occupies bits `i*(f+1) .. i*(f+1)+f` of the word (field 0 is
//! lowest) and holds a two's-complement value; bit `i*(f+1)+f` is padding.

use super::{ArrayMode, PackedError};
use crate::memory::Word;

pub(crate) fn ceil_lg(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Field width needed by a small array of `fields` elements taking updates
/// with `|delta| < 2^delta_bits`.
///
/// Sum-only arrays fold one `T` entry per update, so `|T[i]| < B * 2^delta`
/// and one sign bit plus one bit of slack suffice. Select-enabled arrays keep
/// run offsets below `B * B^4 * 2^delta` and need one extra bit so parallel
/// comparison cannot overflow.
pub fn required_field_bits(fields: usize, delta_bits: u32, mode: ArrayMode) -> u32 {
    let lg = ceil_lg(fields as u64);
    match mode {
        ArrayMode::SumOnly => delta_bits + lg + 2,
        ArrayMode::SelectEnabled => delta_bits + 5 * lg + 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackedLayout {
    fields: usize,
    field_bits: u32,
    word_bits: u32,
    delta_bits: Option<u32>,
    /// Bit 0 of every slot.
    lows: Word,
    /// All field bits set, padding bits clear.
    clean: Word,
    /// Padding bits only.
    pads: Word,
}

impl PackedLayout {
    /// A raw layout of `fields` fields of `field_bits` bits in a `word_bits`-bit word.
    pub fn new(fields: usize, field_bits: u32, word_bits: u32) -> Result<Self, PackedError> {
        if fields == 0 {
            return Err(PackedError::Layout("at least one field required".into()));
        }
        if !(3..=64).contains(&field_bits) {
            return Err(PackedError::Layout(format!("field width {field_bits} outside 3..=64")));
        }
        if word_bits == 0 || word_bits > 128 {
            return Err(PackedError::Layout(format!("word width {word_bits} outside 1..=128")));
        }
        let slot = field_bits + 1;
        let used = fields as u64 * slot as u64;
        if used > word_bits as u64 {
            return Err(PackedError::Layout(format!(
                "{fields} fields of {field_bits} bits need {used} bits, word has {word_bits}"
            )));
        }
        let mut lows: Word = 0;
        for i in 0..fields {
            lows |= 1 << (i as u32 * slot);
        }
        let field_mask: Word = (1 << field_bits) - 1;
        let clean = lows * field_mask;
        let pads = lows << field_bits;
        Ok(Self { fields, field_bits, word_bits, delta_bits: None, lows, clean, pads })
    }

    /// The narrowest layout that supports `mode` with `delta_bits`-bit updates.
    /// `word_bits` must be 64 or 128.
    pub fn for_mode(
        fields: usize,
        delta_bits: u32,
        mode: ArrayMode,
        word_bits: u32,
    ) -> Result<Self, PackedError> {
        if word_bits != 64 && word_bits != 128 {
            return Err(PackedError::Layout(format!("word width must be 64 or 128, got {word_bits}")));
        }
        if delta_bits == 0 {
            return Err(PackedError::Layout("delta must be at least 1 bit".into()));
        }
        let f = required_field_bits(fields, delta_bits, mode).max(3);
        let mut layout = Self::new(fields, f, word_bits)?;
        layout.delta_bits = Some(delta_bits);
        Ok(layout)
    }

    /// Largest `B >= 2` whose layout fits, if any.
    pub fn largest_fields(delta_bits: u32, mode: ArrayMode, word_bits: u32) -> Option<usize> {
        let mut best = None;
        for b in 2..=word_bits as usize {
            if Self::for_mode(b, delta_bits, mode, word_bits).is_ok() {
                best = Some(b);
            } else if best.is_some() {
                break;
            }
        }
        best
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    pub fn field_bits(&self) -> u32 {
        self.field_bits
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn delta_bits(&self) -> Option<u32> {
        self.delta_bits
    }

    pub fn slot_bits(&self) -> u32 {
        self.field_bits + 1
    }

    /// Bits occupied by fields and padding; the rest of the word is free.
    pub fn used_bits(&self) -> u32 {
        self.fields as u32 * self.slot_bits()
    }

    pub fn cleaning_mask(&self) -> Word {
        self.clean
    }

    pub fn padding_mask(&self) -> Word {
        self.pads
    }

    pub fn field_min(&self) -> i64 {
        -(1i64 << (self.field_bits - 1).min(63))
    }

    pub fn field_max(&self) -> i64 {
        ((1i128 << (self.field_bits - 1)) - 1).min(i64::MAX as i128) as i64
    }

    fn field_unsigned(&self, v: i64) -> Word {
        (v as i128 as Word) & ((1 << self.field_bits) - 1)
    }

    fn check_index(&self, i: usize) -> Result<(), PackedError> {
        if i >= self.fields {
            return Err(PackedError::Range { index: i, len: self.fields });
        }
        Ok(())
    }

    pub fn get(&self, word: Word, i: usize) -> i64 {
        let raw = (word >> (i as u32 * self.slot_bits())) & ((1 << self.field_bits) - 1);
        let shift = 128 - self.field_bits;
        (((raw << shift) as i128) >> shift) as i64
    }

    pub fn set(&self, word: Word, i: usize, v: i64) -> Result<Word, PackedError> {
        self.check_index(i)?;
        if v < self.field_min() || v > self.field_max() {
            return Err(PackedError::Encoding(format!(
                "{v} does not fit a {}-bit field",
                self.field_bits
            )));
        }
        let at = i as u32 * self.slot_bits();
        let cleared = word & !(((1 << self.field_bits) - 1) << at);
        Ok(cleared | (self.field_unsigned(v) << at))
    }

    pub fn pack(&self, values: &[i64]) -> Result<Word, PackedError> {
        if values.len() != self.fields {
            return Err(PackedError::Encoding(format!(
                "{} values for {} fields",
                values.len(),
                self.fields
            )));
        }
        values.iter().enumerate().try_fold(0, |w, (i, &v)| self.set(w, i, v))
    }

    pub fn unpack(&self, word: Word) -> Vec<i64> {
        (0..self.fields).map(|i| self.get(word, i)).collect()
    }

    /// True when every padding bit (and every bit above the used region) is zero.
    pub fn is_clean(&self, word: Word) -> bool {
        word & !self.clean == 0
    }

    /// Adds `v` to every field at index `>= k` with one multiplication and one
    /// addition: the all-ones-per-field pattern is shifted right then left to
    /// drop the fields below `k`, multiplied by `v`, added, and the padding
    /// bits hit by two's-complement carries are cleared with the cleaning mask.
    pub fn broadcast_suffix_add(&self, word: Word, k: usize, v: i64) -> Result<Word, PackedError> {
        self.check_index(k)?;
        let limit = self.field_max();
        if v < -limit || v > limit {
            return Err(PackedError::Encoding(format!(
                "{v} not representable in {} bits",
                self.field_bits - 1
            )));
        }
        let shift = k as u32 * self.slot_bits();
        let pattern = (self.lows >> shift) << shift;
        let spread = pattern.wrapping_mul(self.field_unsigned(v));
        Ok(word.wrapping_add(spread) & self.clean)
    }

    /// Counts fields `lo..=hi` holding a value `< c`.
    ///
    /// Fields must satisfy `|x| < 2^(f-2)`: one bit of headroom so that the
    /// field-wise subtraction `x - c` cannot overflow. `c` is clamped into
    /// that range first, which preserves every comparison. Subtraction runs
    /// on all fields at once with the padding bits set as borrow stops; the
    /// sign bit of each difference is the comparison result and the selected
    /// sign bits are summed by one multiplication with the per-slot ones pattern.
    pub fn count_less_than(&self, word: Word, c: i64, lo: usize, hi: usize) -> usize {
        if lo > hi || lo >= self.fields {
            return 0;
        }
        let hi = hi.min(self.fields - 1);
        let bound = 1i64 << (self.field_bits - 2).min(62);
        let c = c.clamp(-bound, bound);
        let slot = self.slot_bits();
        let diff = (word | self.pads).wrapping_sub(self.lows.wrapping_mul(self.field_unsigned(c)));
        let signs = (diff >> (self.field_bits - 1)) & self.lows;
        let span = (self.lows >> (lo as u32 * slot)) << (lo as u32 * slot);
        let keep = if hi + 1 < self.fields {
            span & ((1 << ((hi as u32 + 1) * slot)) - 1)
        } else {
            span
        };
        let selected = signs & keep;
        let top = (self.fields as u32 - 1) * slot;
        let total = selected.wrapping_mul(self.lows) >> top;
        (total & ((1 << slot) - 1)) as usize
    }
}
