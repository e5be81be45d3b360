//! Bit-sequence primitives: runs, alternating substrings, d-regularity,
//! column folding and the `2^(t-1)`-ary view.
//!
//! Sequences are packed into a `u64` with the first symbol in the most
//! significant used bit, so numeric order on equal-length sequences is
//! lexicographic order. Positions inside [`Interval`] are 1-based and
//! inclusive, matching the way bursts and runs are usually written down;
//! slice-style accessors (`bit`, `slice`) are 0-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest sequence a [`BitSequence`] can hold.
pub const MAX_LEN: usize = 64;

#[inline]
pub(crate) fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// A fixed-length binary sequence of at most [`MAX_LEN`] symbols.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitSequence {
    // field order gives (len, value) ordering
    len: u8,
    value: u64,
}

impl BitSequence {
    /// The empty sequence.
    pub const EMPTY: BitSequence = BitSequence { len: 0, value: 0 };

    /// Packs `value` (first symbol = most significant of the low `len` bits).
    pub fn from_value(value: u64, len: usize) -> Result<Self> {
        if len > MAX_LEN {
            return Err(Error::TooLong { len, max: MAX_LEN });
        }
        Ok(BitSequence {
            len: len as u8,
            value: value & mask(len),
        })
    }

    #[inline]
    pub(crate) fn raw(value: u64, len: usize) -> Self {
        debug_assert!(len <= MAX_LEN);
        BitSequence {
            len: len as u8,
            value: value & mask(len),
        }
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::from_value(0, len)
    }

    pub fn ones(len: usize) -> Result<Self> {
        Self::from_value(u64::MAX, len)
    }

    /// Builds a sequence from symbols that must each be 0 or 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() > MAX_LEN {
            return Err(Error::TooLong {
                len: bits.len(),
                max: MAX_LEN,
            });
        }
        let mut value = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidBit(char::from(b'0' + b.min(9))));
            }
            value = (value << 1) | u64::from(b);
        }
        Ok(Self::raw(value, bits.len()))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed value; see the module docs for the bit order.
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Symbol at 0-based index `i`.
    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        debug_assert!(i < self.len());
        ((self.value >> (self.len() - 1 - i)) & 1) as u8
    }

    /// Symbol at 1-based position `p`, or `None` outside `[1, n]`.
    #[inline]
    pub fn at(&self, p: usize) -> Option<u8> {
        if p == 0 || p > self.len() {
            None
        } else {
            Some(self.bit(p - 1))
        }
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.bit(i)).collect()
    }

    pub fn weight(&self) -> u32 {
        self.value.count_ones()
    }

    /// 0-based half-open slice `[start, end)`.
    #[inline]
    pub fn slice(&self, start: usize, end: usize) -> BitSequence {
        debug_assert!(start <= end && end <= self.len());
        let width = end - start;
        if width == 0 {
            return Self::EMPTY;
        }
        Self::raw(self.value >> (self.len() - end), width)
    }

    /// Concatenation; panics in debug builds if the result exceeds [`MAX_LEN`].
    #[inline]
    pub fn concat(&self, other: &BitSequence) -> BitSequence {
        let len = self.len() + other.len();
        debug_assert!(len <= MAX_LEN);
        let hi = if other.len() >= 64 {
            0
        } else {
            self.value << other.len()
        };
        Self::raw(hi | other.value, len)
    }

    pub fn concat_all(parts: &[BitSequence]) -> Result<BitSequence> {
        let len: usize = parts.iter().map(BitSequence::len).sum();
        if len > MAX_LEN {
            return Err(Error::TooLong { len, max: MAX_LEN });
        }
        Ok(parts.iter().fold(Self::EMPTY, |acc, p| acc.concat(p)))
    }

    /// Copy with the symbol at 0-based index `i` replaced.
    pub fn with_bit(&self, i: usize, b: u8) -> BitSequence {
        let shift = self.len() - 1 - i;
        let v = (self.value & !(1u64 << shift)) | (u64::from(b & 1) << shift);
        Self::raw(v, self.len())
    }

    /// Appends `count` zeros.
    pub fn pad_zeros(&self, count: usize) -> Result<BitSequence> {
        Ok(self.concat(&BitSequence::zeros(count)?))
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }

    /// Every sequence of length `len`, in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = BitSequence> {
        assert!(len < 64, "exhaustive iteration needs len < 64");
        (0..(1u64 << len)).map(move |v| BitSequence::raw(v, len))
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSequence({self})")
    }
}

impl FromStr for BitSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > MAX_LEN {
            return Err(Error::TooLong {
                len: s.len(),
                max: MAX_LEN,
            });
        }
        let mut value = 0u64;
        for c in s.chars() {
            let b = match c {
                '0' => 0,
                '1' => 1,
                other => return Err(Error::InvalidBit(other)),
            };
            value = (value << 1) | b;
        }
        Ok(Self::raw(value, s.len()))
    }
}

impl Serialize for BitSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A 1-based inclusive index interval `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Interval { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: usize) -> bool {
        self.start <= p && p <= self.end
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

/// Maximal runs of equal symbols, in order.
pub fn runs(x: &BitSequence) -> Result<Vec<Interval>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut out = Vec::new();
    let mut start = 1;
    for p in 2..=x.len() {
        if x.at(p) != x.at(p - 1) {
            out.push(Interval::new(start, p - 1));
            start = p;
        }
    }
    out.push(Interval::new(start, x.len()));
    Ok(out)
}

/// Maximal alternating substrings: intervals on which `x_i = x_{i+2}` holds
/// for every inner index. A break at `i` (where `x_i != x_{i+2}`) ends one
/// interval at `i+1` and starts the next there, so neighbours share exactly
/// one index. Every length-2 window qualifies vacuously.
pub fn alternating_intervals(x: &BitSequence) -> Result<Vec<Interval>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = x.len();
    let mut out = Vec::new();
    let mut start = 1;
    for i in 1..=n.saturating_sub(2) {
        if x.at(i) != x.at(i + 2) {
            out.push(Interval::new(start, i + 1));
            start = i + 1;
        }
    }
    out.push(Interval::new(start, n));
    Ok(out)
}

/// Window length `ceil(d * log2 n)` used by the regularity scan (at least 1).
pub fn regularity_window(n: usize, d: f64) -> usize {
    if n <= 1 {
        return 1;
    }
    let w = d * (n as f64).log2();
    // absorb float fuzz such as 1.34 * 3 = 4.0200000000000005
    ((w - 1e-9).ceil() as usize).max(1)
}

/// Whether every substring of length at least `d * log2 n` contains both
/// `00` and `11`. Vacuously true when that length exceeds `n`.
pub fn is_d_regular(x: &BitSequence, d: f64) -> bool {
    let n = x.len();
    let w = regularity_window(n, d);
    if w > n {
        return true;
    }
    if w < 2 {
        return false;
    }
    // sliding counts of "00" and "11" pairs inside the window
    let pair = |i: usize| -> (u32, u32) {
        let (a, b) = (x.bit(i), x.bit(i + 1));
        match (a, b) {
            (0, 0) => (1, 0),
            (1, 1) => (0, 1),
            _ => (0, 0),
        }
    };
    let (mut zz, mut oo) = (0u32, 0u32);
    for i in 0..w - 1 {
        let (a, b) = pair(i);
        zz += a;
        oo += b;
    }
    if zz == 0 || oo == 0 {
        return false;
    }
    for s in 1..=n - w {
        let (a, b) = pair(s - 1);
        zz -= a;
        oo -= b;
        let (a, b) = pair(s + w - 2);
        zz += a;
        oo += b;
        if zz == 0 || oo == 0 {
            return false;
        }
    }
    true
}

/// Column-interleaved folding of a sequence into `width` rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FoldedMatrix {
    width: usize,
    columns: usize,
    pad_count: usize,
    source: BitSequence,
}

impl FoldedMatrix {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn pad_count(&self) -> usize {
        self.pad_count
    }

    pub fn source(&self) -> &BitSequence {
        &self.source
    }

    /// Entry at 1-based `(row, column)`.
    pub fn entry(&self, row: usize, column: usize) -> u8 {
        assert!((1..=self.width).contains(&row) && (1..=self.columns).contains(&column));
        self.source.at((column - 1) * self.width + row).unwrap_or(0)
    }

    /// Row `r` (1-based) as a sequence of length `columns`.
    pub fn row(&self, r: usize) -> BitSequence {
        let mut v = 0u64;
        for c in 1..=self.columns {
            v = (v << 1) | u64::from(self.entry(r, c));
        }
        BitSequence::raw(v, self.columns)
    }
}

/// Folds `x` into a `w`-row matrix, appending zeros when `w` does not divide `n`.
pub fn fold(x: &BitSequence, w: usize) -> Result<FoldedMatrix> {
    if w == 0 {
        return Err(Error::InvalidParameter("fold width must be positive".into()));
    }
    let n = x.len();
    let pad_count = (w - n % w) % w;
    if n + pad_count > MAX_LEN {
        return Err(Error::TooLong {
            len: n + pad_count,
            max: MAX_LEN,
        });
    }
    Ok(FoldedMatrix {
        width: w,
        columns: (n + pad_count) / w,
        pad_count,
        source: *x,
    })
}

/// Reads the matrix back column by column, padding included.
pub fn unfold(m: &FoldedMatrix) -> BitSequence {
    m.source
        .concat(&BitSequence::raw(0, m.pad_count))
}

/// Rebuilds a matrix from its rows (all of equal length).
pub fn from_rows(rows: &[BitSequence]) -> Result<FoldedMatrix> {
    let width = rows.len();
    if width == 0 {
        return Err(Error::InvalidParameter("no rows".into()));
    }
    let columns = rows[0].len();
    if rows.iter().any(|r| r.len() != columns) {
        return Err(Error::InvalidParameter("rows differ in length".into()));
    }
    if width * columns > MAX_LEN {
        return Err(Error::TooLong {
            len: width * columns,
            max: MAX_LEN,
        });
    }
    let mut v = 0u64;
    for c in 0..columns {
        for r in rows {
            v = (v << 1) | u64::from(r.bit(c));
        }
    }
    Ok(FoldedMatrix {
        width,
        columns,
        pad_count: 0,
        source: BitSequence::raw(v, width * columns),
    })
}

/// The `2^(t-1)`-ary reading of a sequence: one symbol per width-`(t-1)` block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QarySequence {
    symbols: Vec<u32>,
    exponent: u32,
    pad_count: usize,
}

impl QarySequence {
    pub fn new(symbols: Vec<u32>, exponent: u32) -> Result<Self> {
        if exponent == 0 || exponent > 31 {
            return Err(Error::InvalidParameter(format!(
                "alphabet exponent {exponent} outside [1, 31]"
            )));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >> exponent != 0) {
            return Err(Error::InvalidParameter(format!(
                "symbol {s} not below 2^{exponent}"
            )));
        }
        Ok(QarySequence {
            symbols,
            exponent,
            pad_count: 0,
        })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn pad_count(&self) -> usize {
        self.pad_count
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Big-endian value of each width-`(t-1)` block of `x` (zero-padded).
pub fn fold_qary(x: &BitSequence, t: usize) -> Result<QarySequence> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!("fold_qary needs t >= 2, got {t}")));
    }
    let w = t - 1;
    if w > 31 {
        return Err(Error::InvalidParameter("block width above 31".into()));
    }
    let n = x.len();
    let pad_count = (w - n % w) % w;
    let padded = x.pad_zeros(pad_count)?;
    let symbols = (0..padded.len() / w)
        .map(|i| padded.slice(i * w, (i + 1) * w).value() as u32)
        .collect();
    Ok(QarySequence {
        symbols,
        exponent: w as u32,
        pad_count,
    })
}

/// Inverse of [`fold_qary`]; the recorded padding is stripped again.
pub fn unfold_qary(q: &QarySequence) -> Result<BitSequence> {
    let w = q.exponent as usize;
    let total = q.symbols.len() * w;
    if total > MAX_LEN {
        return Err(Error::TooLong {
            len: total,
            max: MAX_LEN,
        });
    }
    let v = q
        .symbols
        .iter()
        .fold(0u64, |acc, &s| (acc << w) | u64::from(s));
    Ok(BitSequence::raw(v, total).slice(0, total - q.pad_count))
}
