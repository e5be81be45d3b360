//! Burst deletion-insertion (DI) and deletion-substitution (DS) channels.
//!
//! A DI burst at 1-based position `i` deletes `t1` symbols starting at `x_i`
//! and inserts a block `b` of `t2` symbols in their place. A DS burst deletes
//! `t1` symbols and then overwrites the next `w = min(t2, remaining)` symbols.
//! Later bursts are addressed in the coordinates of the original word.
//!
//! Four legality variants are provided:
//!
//! * [`Variant::Strict`]: the burst definitions as written. DI requires
//!   `b_1 != x_i` and `b_t2 != x_{i+t1-1}`; DS requires `b_1 != x_i`.
//! * [`Variant::FirstOnly`]: only `b_1 != x_i` is enforced.
//! * [`Variant::Free`]: no constraint on the new symbols.
//! * [`Variant::Partition`]: two-burst DI only; the first-only ball together
//!   with the sentinel cell used to count balls exactly.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seqcore::{BitSequence, MAX_LEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Di,
    Ds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Strict,
    FirstOnly,
    Free,
    Partition,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Di => "di",
            Model::Ds => "ds",
        })
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Strict => "strict",
            Variant::FirstOnly => "first-only",
            Variant::Free => "free",
            Variant::Partition => "partition",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "di" => Ok(Model::Di),
            "ds" => Ok(Model::Ds),
            _ => Err(invalid(format!("unknown model {s:?}"))),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strict" | "definition" => Ok(Variant::Strict),
            "first-only" | "first" => Ok(Variant::FirstOnly),
            "free" => Ok(Variant::Free),
            "partition" => Ok(Variant::Partition),
            _ => Err(invalid(format!("unknown variant {s:?}"))),
        }
    }
}

/// Deletion and insertion/substitution lengths of one burst.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub t1: usize,
    pub t2: usize,
}

impl Shape {
    pub const fn new(t1: usize, t2: usize) -> Self {
        Shape { t1, t2 }
    }

    pub const fn swapped(self) -> Self {
        Shape {
            t1: self.t2,
            t2: self.t1,
        }
    }
}

/// An m-burst channel: `m` bursts of the same shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub m: usize,
    pub t1: usize,
    pub t2: usize,
    pub model: Model,
    pub variant: Variant,
}

impl ChannelSpec {
    pub const fn new(m: usize, t1: usize, t2: usize, model: Model, variant: Variant) -> Self {
        ChannelSpec {
            m,
            t1,
            t2,
            model,
            variant,
        }
    }

    pub const fn di(m: usize, t1: usize, t2: usize) -> Self {
        Self::new(m, t1, t2, Model::Di, Variant::Strict)
    }

    pub const fn ds(m: usize, t1: usize, t2: usize) -> Self {
        Self::new(m, t1, t2, Model::Ds, Variant::Strict)
    }

    pub const fn with_variant(self, variant: Variant) -> Self {
        ChannelSpec { variant, ..self }
    }

    pub fn shapes(&self) -> Vec<Shape> {
        vec![Shape::new(self.t1, self.t2); self.m]
    }

    /// Length of every output word for an input of length `n`
    /// (DS outputs are shorter by `m * t1` regardless of window truncation).
    pub fn output_len(&self, n: usize) -> Option<usize> {
        let del = self.m * self.t1;
        match self.model {
            Model::Di => (n + self.m * self.t2).checked_sub(del),
            Model::Ds => n.checked_sub(del),
        }
    }

    /// Whether `n` is too short to host `m` bursts.
    pub fn too_short(&self, n: usize) -> bool {
        n < self.m * self.t1.max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.variant == Variant::Partition && (self.model != Model::Di || self.m != 2) {
            return Err(invalid("the partition variant is defined for two DI bursts only"));
        }
        if self.variant == Variant::Partition && (self.t1 == 0 || self.t2 == 0) {
            return Err(invalid("the partition variant needs t1, t2 >= 1"));
        }
        Ok(())
    }
}

/// One burst of a concrete pattern. For DS bursts `block` holds the new
/// values of the substitution window, so its length is the window width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Burst {
    pub position: usize,
    pub deleted: usize,
    pub block: BitSequence,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BurstPattern {
    pub model: Model,
    pub bursts: Vec<Burst>,
}

impl BurstPattern {
    pub fn di(bursts: Vec<Burst>) -> Self {
        BurstPattern {
            model: Model::Di,
            bursts,
        }
    }

    pub fn ds(bursts: Vec<Burst>) -> Self {
        BurstPattern {
            model: Model::Ds,
            bursts,
        }
    }
}

impl Burst {
    pub fn new(position: usize, deleted: usize, block: BitSequence) -> Self {
        Burst {
            position,
            deleted,
            block,
        }
    }
}

// Legality of a DI block at 0-based position `i`.
#[inline]
fn di_legal(x: &BitSequence, i: usize, t1: usize, b: &BitSequence, variant: Variant) -> bool {
    if b.is_empty() || variant == Variant::Free {
        return true;
    }
    let n = x.len();
    let first = b.bit(0);
    if i < n && first == x.bit(i) {
        return false;
    }
    if variant == Variant::Strict {
        let last = b.bit(b.len() - 1);
        // x_{i+t1-1} in 1-based terms; for t1 = 0 this is the symbol before the burst
        if t1 >= 1 {
            if last == x.bit(i + t1 - 1) {
                return false;
            }
        } else if i >= 1 && last == x.bit(i - 1) {
            return false;
        }
    }
    true
}

#[inline]
fn ds_legal(x: &BitSequence, i: usize, b: &BitSequence, variant: Variant) -> bool {
    if b.is_empty() || variant == Variant::Free {
        return true;
    }
    b.bit(0) != x.bit(i)
}

/// Window width of a DS burst at 0-based position `i`.
#[inline]
pub(crate) fn ds_window(n: usize, i: usize, t1: usize, t2: usize) -> usize {
    t2.min(n - i - t1)
}

/// Applies a pattern under the strict burst definitions.
pub fn apply(x: &BitSequence, p: &BurstPattern) -> Result<BitSequence> {
    apply_variant(x, p, Variant::Strict)
}

/// Applies a pattern, checking legality under `variant`.
pub fn apply_variant(x: &BitSequence, p: &BurstPattern, variant: Variant) -> Result<BitSequence> {
    let n = x.len();
    let mut out = BitSequence::EMPTY;
    let mut copied = 0usize;
    let mut out_len = n;
    for (k, burst) in p.bursts.iter().enumerate() {
        let Burst {
            position,
            deleted,
            block,
        } = burst;
        let last_start = n + 1 - (*deleted).min(n);
        if *position == 0 || *position > last_start || *deleted > n {
            return Err(Error::OutOfRange {
                position: *position,
                len: n,
            });
        }
        let i = position - 1;
        if i < copied {
            return Err(Error::IllegalPattern(format!(
                "burst {} at position {position} overlaps the previous burst",
                k + 1
            )));
        }
        out = out.concat(&x.slice(copied, i));
        match p.model {
            Model::Di => {
                if !di_legal(x, i, *deleted, block, variant) {
                    return Err(Error::IllegalPattern(format!(
                        "inserted block {block} at position {position} repeats a boundary symbol"
                    )));
                }
                out_len = out_len + block.len() - deleted;
                if out_len > MAX_LEN {
                    return Err(Error::TooLong {
                        len: out_len,
                        max: MAX_LEN,
                    });
                }
                out = out.concat(block);
                copied = i + deleted;
            }
            Model::Ds => {
                if i + deleted + block.len() > n {
                    return Err(Error::IllegalPattern(format!(
                        "substitution window at position {position} runs past the end"
                    )));
                }
                if !ds_legal(x, i, block, variant) {
                    return Err(Error::IllegalPattern(format!(
                        "first substituted symbol at position {position} equals x_{position}"
                    )));
                }
                out = out.concat(block);
                copied = i + deleted + block.len();
            }
        }
    }
    Ok(out.concat(&x.slice(copied, n)))
}

fn blocks(len: usize) -> impl Iterator<Item = BitSequence> {
    (0..(1u64 << len)).map(move |v| BitSequence::raw(v, len))
}

// Recursive enumeration of every output reachable through `shapes` in order.
#[allow(clippy::too_many_arguments)]
fn enumerate(
    x: &BitSequence,
    shapes: &[Shape],
    model: Model,
    variant: Variant,
    start: usize,
    copied: usize,
    acc: BitSequence,
    emit: &mut dyn FnMut(BitSequence, &[usize]),
    positions: &mut Vec<usize>,
) {
    let n = x.len();
    let Some((shape, rest)) = shapes.split_first() else {
        emit(acc.concat(&x.slice(copied, n)), positions);
        return;
    };
    let t1 = shape.t1;
    let last = if t1 == 0 { n } else { n.saturating_sub(t1) };
    if t1 > n {
        return;
    }
    for i in start..=last {
        let prefix = acc.concat(&x.slice(copied, i));
        positions.push(i + 1);
        match model {
            Model::Di => {
                for b in blocks(shape.t2) {
                    if di_legal(x, i, t1, &b, variant) {
                        enumerate(
                            x,
                            rest,
                            model,
                            variant,
                            i + t1,
                            i + t1,
                            prefix.concat(&b),
                            emit,
                            positions,
                        );
                    }
                }
            }
            Model::Ds => {
                let w = ds_window(n, i, t1, shape.t2);
                for b in blocks(w) {
                    if ds_legal(x, i, &b, variant) {
                        enumerate(
                            x,
                            rest,
                            model,
                            variant,
                            i + t1 + w,
                            i + t1 + w,
                            prefix.concat(&b),
                            emit,
                            positions,
                        );
                    }
                }
            }
        }
        positions.pop();
    }
}

/// Every output of the bursts `shapes` applied in positional order, with the
/// 1-based burst positions that produced it. Duplicates are reported.
pub fn for_each_output(
    x: &BitSequence,
    shapes: &[Shape],
    model: Model,
    variant: Variant,
    mut emit: impl FnMut(BitSequence, &[usize]),
) {
    let v = if variant == Variant::Partition {
        Variant::FirstOnly
    } else {
        variant
    };
    let mut positions = Vec::with_capacity(shapes.len());
    enumerate(
        x,
        shapes,
        model,
        v,
        0,
        0,
        BitSequence::EMPTY,
        &mut emit,
        &mut positions,
    );
}

fn sorted(mut v: Vec<BitSequence>) -> Vec<BitSequence> {
    v.sort_unstable();
    v.dedup();
    v
}

/// The error ball of `x` under `spec`, sorted and deduplicated. Empty when
/// `x` is too short to host the bursts.
pub fn ball(x: &BitSequence, spec: &ChannelSpec) -> Result<Vec<BitSequence>> {
    spec.validate()?;
    if spec.too_short(x.len()) || spec.output_len(x.len()).is_none_or(|l| l > MAX_LEN) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for_each_output(x, &spec.shapes(), spec.model, spec.variant, |y, _| out.push(y));
    if spec.variant == Variant::Partition {
        out.extend(sentinel_cell(x, spec.t1, spec.t2)?);
    }
    Ok(sorted(out))
}

/// Strict two-or-more-burst DI ball.
pub fn ball_di(x: &BitSequence, m: usize, t1: usize, t2: usize) -> Result<Vec<BitSequence>> {
    ball(x, &ChannelSpec::di(m, t1, t2))
}

/// Strict DS ball.
pub fn ball_ds(x: &BitSequence, m: usize, t1: usize, t2: usize) -> Result<Vec<BitSequence>> {
    ball(x, &ChannelSpec::ds(m, t1, t2))
}

/// Ball of one `(t1,t2)` burst and one `(t2,t1)` burst in either order.
pub fn ball_mixed(x: &BitSequence, t1: usize, t2: usize, variant: Variant) -> Vec<BitSequence> {
    let a = Shape::new(t1, t2);
    let mut out = Vec::new();
    for order in [[a, a.swapped()], [a.swapped(), a]] {
        for_each_output(x, &order, Model::Di, variant, |y, _| out.push(y));
    }
    sorted(out)
}

fn sentinel_cell(x: &BitSequence, t1: usize, t2: usize) -> Result<Vec<BitSequence>> {
    let n = x.len();
    if 2 * t1 > n + 1 {
        return Ok(Vec::new());
    }
    let p = n + 1 - 2 * t1;
    let head = x
        .slice(0, p)
        .concat(&BitSequence::raw(u64::from(1 - x.bit(p)), 1));
    Ok(blocks(2 * t2 - 2).map(|tail| head.concat(&tail)).collect())
}

/// A cell of the partition of the two-burst ball: outputs whose bursts sit
/// at exactly `(i1, i2)` with only the first inserted symbol constrained, or
/// the sentinel cell at `(n-2t1+2, n-t1+2)`.
pub fn partition_cell(
    x: &BitSequence,
    i1: usize,
    i2: usize,
    t1: usize,
    t2: usize,
) -> Result<Vec<BitSequence>> {
    let n = x.len();
    if t1 == 0 || t2 == 0 || 2 * t1 > n {
        return Err(invalid("partition cells need t1, t2 >= 1 and n >= 2*t1"));
    }
    if i1 == n + 2 - 2 * t1 && i2 == n + 2 - t1 {
        return sentinel_cell(x, t1, t2);
    }
    if i1 == 0 || i1 + t1 > i2 || i2 + t1 > n + 1 {
        return Err(invalid(format!("({i1}, {i2}) is not a cell index pair")));
    }
    let mut out = Vec::new();
    for b in blocks(t2).filter(|b| b.bit(0) != x.bit(i1 - 1)) {
        for c in blocks(t2).filter(|c| c.bit(0) != x.bit(i2 - 1)) {
            let y = x
                .slice(0, i1 - 1)
                .concat(&b)
                .concat(&x.slice(i1 - 1 + t1, i2 - 1))
                .concat(&c)
                .concat(&x.slice(i2 - 1 + t1, n));
            out.push(y);
        }
    }
    Ok(sorted(out))
}

/// All cell index pairs, interior pairs first, sentinel last.
pub fn partition_pairs(n: usize, t1: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if 2 * t1 > n {
        return out;
    }
    for i1 in 1..=n + 1 - 2 * t1 {
        for i2 in i1 + t1..=n + 1 - t1 {
            out.push((i1, i2));
        }
    }
    out.push((n + 2 - 2 * t1, n + 2 - t1));
    out
}

/// Whether the balls of `x` and `y` intersect.
pub fn confusable(x: &BitSequence, y: &BitSequence, spec: &ChannelSpec) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let bx = ball(x, spec)?;
    let by = ball(y, spec)?;
    let (small, large) = if bx.len() <= by.len() { (bx, by) } else { (by, bx) };
    Ok(small.iter().any(|w| large.binary_search(w).is_ok()))
}

// Reverse enumeration: every (x', positions) such that y is produced from x'
// by `shapes` under `variant`, for x' of length n.
#[allow(clippy::too_many_arguments)]
fn reverse(
    y: &BitSequence,
    n: usize,
    shapes: &[Shape],
    model: Model,
    variant: Variant,
    cursor: usize,
    acc: BitSequence,
    emit: &mut dyn FnMut(BitSequence),
) {
    let Some((shape, rest)) = shapes.split_first() else {
        if acc.len() + y.len() - cursor == n {
            emit(acc.concat(&y.slice(cursor, y.len())));
        }
        return;
    };
    let remaining_shapes_y: usize = rest
        .iter()
        .map(|s| if model == Model::Di { s.t2 } else { 0 })
        .sum();
    let t1 = shape.t1;
    for p in cursor..=y.len() {
        // x' coordinate of the burst start
        let i = acc.len() + (p - cursor);
        if i + t1 > n {
            break;
        }
        let width = match model {
            Model::Di => shape.t2,
            Model::Ds => ds_window(n, i, t1, shape.t2),
        };
        if p + width + remaining_shapes_y > y.len() {
            break;
        }
        let prefix = acc.concat(&y.slice(cursor, p));
        let b = y.slice(p, p + width);
        match model {
            Model::Di => {
                for d in blocks(t1) {
                    let cand = prefix.concat(&d);
                    // legality only looks at the deleted block and the symbol before it
                    if !variant_ok_di(&cand, i, t1, &b, variant) {
                        continue;
                    }
                    reverse(y, n, rest, model, variant, p + width, cand, emit);
                }
            }
            Model::Ds => {
                for d in blocks(t1) {
                    if variant != Variant::Free && width > 0 && t1 > 0 && b.bit(0) == d.bit(0) {
                        continue;
                    }
                    for o in blocks(width) {
                        if variant != Variant::Free && width > 0 && t1 == 0 && b.bit(0) == o.bit(0)
                        {
                            continue;
                        }
                        let cand = prefix.concat(&d).concat(&o);
                        reverse(y, n, rest, model, variant, p + width, cand, emit);
                    }
                }
            }
        }
    }
}

fn variant_ok_di(cand: &BitSequence, i: usize, t1: usize, b: &BitSequence, variant: Variant) -> bool {
    if b.is_empty() || variant == Variant::Free {
        return true;
    }
    if t1 == 0 {
        // x_i lies beyond the candidate prefix; checked by the forward pass
        return true;
    }
    if b.bit(0) == cand.bit(i) {
        return false;
    }
    !(variant == Variant::Strict && b.bit(b.len() - 1) == cand.bit(i + t1 - 1))
}

/// Every word of length `n` whose ball under `spec` contains `y`.
pub fn preimages(y: &BitSequence, n: usize, spec: &ChannelSpec) -> Result<Vec<BitSequence>> {
    spec.validate()?;
    if spec.output_len(n) != Some(y.len()) || n > MAX_LEN {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let v = if spec.variant == Variant::Partition {
        Variant::FirstOnly
    } else {
        spec.variant
    };
    let shapes = spec.shapes();
    reverse(y, n, &shapes, spec.model, v, 0, BitSequence::EMPTY, &mut |c| {
        out.push(c)
    });
    if spec.variant == Variant::Partition && 2 * spec.t1 <= n + 1 {
        // sentinel cell: x' shares the first p symbols and flips symbol p+1
        let p = n + 1 - 2 * spec.t1;
        let head = y
            .slice(0, p)
            .concat(&BitSequence::raw(u64::from(1 - y.bit(p)), 1));
        out.extend(blocks(n - p - 1).map(|tail| head.concat(&tail)));
    }
    let mut out = sorted(out);
    if spec.t1 == 0 || spec.variant == Variant::Partition {
        // boundary cases the local pruning cannot see: confirm forward
        out.retain(|c| ball(c, spec).is_ok_and(|b| b.binary_search(y).is_ok()));
    }
    Ok(out)
}

/// Words `x' != x` of the same length that are confusable with `x`, via
/// union of the preimages of every ball element.
pub fn nbhd(x: &BitSequence, spec: &ChannelSpec) -> Result<Vec<BitSequence>> {
    let n = x.len();
    let mut set = HashSet::new();
    for y in ball(x, spec)? {
        set.extend(preimages(&y, n, spec)?);
    }
    set.remove(x);
    Ok(sorted(set.into_iter().collect()))
}

/// Two-burst strict `(t1,t2)`-DI neighbourhood.
pub fn nbhd_di(x: &BitSequence, t1: usize, t2: usize) -> Result<Vec<BitSequence>> {
    if x.len() <= 2 * t1 {
        return Err(invalid(format!(
            "neighbourhood needs n > 2*t1, got n = {}",
            x.len()
        )));
    }
    nbhd(x, &ChannelSpec::di(2, t1, t2))
}

/// Two-burst strict `(1,t)`-DS neighbourhood.
pub fn nbhd_ds(x: &BitSequence, t: usize) -> Result<Vec<BitSequence>> {
    if x.len() <= 2 {
        return Err(invalid("neighbourhood needs n > 2"));
    }
    nbhd(x, &ChannelSpec::ds(2, 1, t))
}

/// Neighbourhoods of every word of length `n`, indexed by packed value.
/// Built from an inverted index of all balls.
pub fn all_nbhds(n: usize, spec: &ChannelSpec) -> Result<Vec<Vec<BitSequence>>> {
    crate::check_budget("neighbourhood table", n)?;
    let words: Vec<BitSequence> = BitSequence::all(n).collect();
    let balls: Vec<Vec<BitSequence>> = words.par_iter().map(|x| ball(x, spec)).collect::<Result<_>>()?;
    let mut index: HashMap<BitSequence, Vec<u32>> = HashMap::new();
    for (k, b) in balls.iter().enumerate() {
        for y in b {
            index.entry(*y).or_default().push(k as u32);
        }
    }
    Ok(balls
        .par_iter()
        .enumerate()
        .map(|(k, b)| {
            let mut ids: Vec<u32> = b.iter().flat_map(|y| index[y].iter().copied()).collect();
            ids.sort_unstable();
            ids.dedup();
            ids.into_iter()
                .filter(|&v| v as usize != k)
                .map(|v| words[v as usize])
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitSequence {
        s.parse().unwrap()
    }

    fn strs(v: &[BitSequence]) -> Vec<String> {
        v.iter().map(|b| b.to_string()).collect()
    }

    // straightforward list-based channel used as the oracle
    fn naive_ball(x: &[u8], shapes: &[(usize, usize)], ds: bool, variant: Variant) -> Vec<String> {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            x: &[u8],
            shapes: &[(usize, usize)],
            ds: bool,
            variant: Variant,
            start: usize,
            pos: usize,
            acc: Vec<u8>,
            out: &mut Vec<String>,
        ) {
            let n = x.len();
            if shapes.is_empty() {
                let mut y = acc;
                y.extend_from_slice(&x[pos..]);
                out.push(y.iter().map(|b| char::from(b'0' + b)).collect());
                return;
            }
            let (t1, t2) = shapes[0];
            if t1 > n {
                return;
            }
            for i in start..=n - t1 {
                let w = if ds { t2.min(n - i - t1) } else { t2 };
                for v in 0..(1u32 << w) {
                    let b: Vec<u8> = (0..w).map(|k| ((v >> (w - 1 - k)) & 1) as u8).collect();
                    if w > 0 && variant != Variant::Free {
                        if b[0] == x[i] {
                            continue;
                        }
                        if !ds && variant == Variant::Strict && b[w - 1] == x[i + t1 - 1] {
                            continue;
                        }
                    }
                    let mut a = acc.clone();
                    a.extend_from_slice(&x[pos..i]);
                    a.extend_from_slice(&b);
                    let next = if ds { i + t1 + w } else { i + t1 };
                    rec(x, &shapes[1..], ds, variant, next, next, a, out);
                }
            }
        }
        let mut out = Vec::new();
        rec(x, shapes, ds, variant, 0, 0, Vec::new(), &mut out);
        out.sort();
        out.dedup();
        // match (len, value) order of BitSequence for equal lengths
        out
    }

    #[test]
    fn worked_example_single_burst() {
        let x = bs("011000001101101011");
        let p = BurstPattern::di(vec![Burst::new(4, 10, bs("1010110"))]);
        let y = apply(&x, &p).unwrap();
        assert_eq!(y.len(), 15);
        let cols: Vec<String> = (0..5).map(|c| y.slice(3 * c, 3 * c + 3).to_string()).collect();
        assert_eq!(cols, ["011", "101", "011", "001", "011"]);
    }

    #[test]
    fn apply_length_arithmetic() {
        let x = bs("0110100111");
        let p = BurstPattern::di(vec![Burst::new(2, 3, bs("011"))]);
        assert_eq!(apply(&x, &p).unwrap().len(), 10);
        let p = BurstPattern::di(vec![
            Burst::new(1, 2, BitSequence::EMPTY),
            Burst::new(5, 2, BitSequence::EMPTY),
        ]);
        assert_eq!(apply(&x, &p).unwrap(), bs("100111"));
    }

    #[test]
    fn apply_rejects_illegal_patterns() {
        let x = bs("0000");
        let bad = BurstPattern::di(vec![Burst::new(1, 1, bs("0"))]);
        assert!(matches!(apply(&x, &bad), Err(Error::IllegalPattern(_))));
        let oob = BurstPattern::di(vec![Burst::new(5, 1, bs("1"))]);
        assert!(matches!(apply(&x, &oob), Err(Error::OutOfRange { .. })));
        let overlap = BurstPattern::di(vec![Burst::new(1, 2, bs("1")), Burst::new(2, 1, bs("1"))]);
        assert!(matches!(apply(&x, &overlap), Err(Error::IllegalPattern(_))));
        let ds = BurstPattern::ds(vec![Burst::new(1, 1, bs("0"))]);
        assert!(apply(&x, &ds).is_err());
        assert_eq!(apply_variant(&x, &ds, Variant::Free).unwrap(), bs("000"));
    }

    #[test]
    fn ball_examples() {
        assert_eq!(strs(&ball_di(&bs("00"), 1, 1, 1).unwrap()), ["01", "10"]);
        assert_eq!(
            strs(&ball_di(&bs("000"), 2, 1, 1).unwrap()),
            ["011", "101", "110"]
        );
        assert_eq!(strs(&ball_di(&bs("0000"), 1, 2, 0).unwrap()), ["00"]);
        // strict ball size for t2 = 1: one choice per pair, skipped when boundaries differ
        let x = bs("0110");
        assert_eq!(strs(&ball_di(&x, 1, 2, 1).unwrap()), ["000"]);
    }

    #[test]
    fn ds_ball_examples() {
        let x = bs("01");
        assert_eq!(strs(&ball_ds(&x, 1, 1, 1).unwrap()), ["0", "1"]);
        let x = bs("0000");
        let b = ball_ds(&x, 1, 1, 2).unwrap();
        assert!(b.contains(&bs("110")) && b.iter().all(|y| y.len() == 3));
        assert_eq!(
            ball_ds(&bs("0110"), 2, 2, 0).unwrap(),
            ball_di(&bs("0110"), 2, 2, 0).unwrap()
        );
    }

    #[test]
    fn balls_agree_with_naive_channel() {
        let cases: &[(&[(usize, usize)], bool)] = &[
            (&[(1, 1)], false),
            (&[(2, 1), (2, 1)], false),
            (&[(1, 2), (1, 2)], false),
            (&[(3, 2), (2, 3)], false),
            (&[(2, 0), (2, 0)], false),
            (&[(1, 1), (1, 1)], true),
            (&[(1, 2), (1, 2)], true),
            (&[(2, 1)], true),
        ];
        for n in 4..=9 {
            for x in BitSequence::all(n) {
                let xs = x.bits();
                for (shapes, ds) in cases {
                    for variant in [Variant::Strict, Variant::FirstOnly, Variant::Free] {
                        let sh: Vec<Shape> = shapes.iter().map(|&(a, b)| Shape::new(a, b)).collect();
                        let model = if *ds { Model::Ds } else { Model::Di };
                        let mut got = Vec::new();
                        for_each_output(&x, &sh, model, variant, |y, _| got.push(y));
                        let got = strs(&sorted(got));
                        let mut got_sorted = got.clone();
                        got_sorted.sort();
                        assert_eq!(got_sorted, naive_ball(&xs, shapes, *ds, variant));
                    }
                }
            }
        }
    }

    #[test]
    fn output_lengths() {
        let spec = ChannelSpec::di(2, 3, 1);
        for x in BitSequence::all(10) {
            assert!(ball(&x, &spec).unwrap().iter().all(|y| y.len() == 6));
        }
        for x in BitSequence::all(8) {
            assert!(ball_mixed(&x, 2, 1, Variant::Strict).iter().all(|y| y.len() == 8));
        }
    }

    #[test]
    fn short_input_gives_empty_ball() {
        assert!(ball_di(&bs("010"), 2, 2, 1).unwrap().is_empty());
        assert!(ChannelSpec::di(2, 2, 1).too_short(3));
    }

    #[test]
    fn partition_cells_tile_the_ball() {
        for (t1, t2) in [(2, 1), (3, 1), (3, 2), (2, 2)] {
            for n in 2 * t1 + 1..=10 {
                let spec = ChannelSpec::di(2, t1, t2).with_variant(Variant::Partition);
                for x in BitSequence::all(n) {
                    let mut seen = HashSet::new();
                    let mut total = 0;
                    for (i1, i2) in partition_pairs(n, t1) {
                        let cell = partition_cell(&x, i1, i2, t1, t2).unwrap();
                        assert_eq!(cell.len(), 1 << (2 * t2 - 2));
                        total += cell.len();
                        for y in cell {
                            assert!(seen.insert(y), "cells overlap for {x}");
                        }
                    }
                    let b = ball(&x, &spec).unwrap();
                    assert_eq!(b.len(), total);
                    assert!(b.iter().all(|y| seen.contains(y)));
                }
            }
        }
    }

    #[test]
    fn partition_cell_rejects_bad_pairs() {
        let x = bs("01101001");
        assert!(partition_cell(&x, 1, 2, 2, 1).is_err());
        assert!(partition_cell(&x, 0, 3, 2, 1).is_err());
        assert_eq!(partition_cell(&x, 6, 8, 2, 1).unwrap().len(), 1);
    }

    #[test]
    fn confusable_examples() {
        let spec = ChannelSpec::di(1, 1, 1);
        let (a, b) = (bs("0000"), bs("1111"));
        assert!(!confusable(&a, &b, &spec).unwrap());
        assert!(confusable(&a, &a, &spec).unwrap());
        assert!(confusable(&a, &bs("1"), &spec).is_err());
    }

    #[test]
    fn preimages_invert_balls() {
        let specs = [
            ChannelSpec::di(2, 2, 1),
            ChannelSpec::di(1, 3, 1),
            ChannelSpec::di(2, 1, 2),
            ChannelSpec::di(2, 2, 1).with_variant(Variant::FirstOnly),
            ChannelSpec::di(2, 2, 1).with_variant(Variant::Free),
            ChannelSpec::di(2, 2, 1).with_variant(Variant::Partition),
            ChannelSpec::ds(2, 1, 1),
            ChannelSpec::ds(2, 1, 2).with_variant(Variant::Free),
            ChannelSpec::ds(1, 2, 1),
        ];
        let n = 7;
        for spec in specs {
            let balls: Vec<Vec<BitSequence>> =
                BitSequence::all(n).map(|x| ball(&x, &spec).unwrap()).collect();
            let mut outputs: Vec<BitSequence> = balls.iter().flatten().copied().collect();
            outputs = sorted(outputs);
            for y in outputs {
                let want: Vec<BitSequence> = BitSequence::all(n)
                    .filter(|x| balls[x.value() as usize].binary_search(&y).is_ok())
                    .collect();
                assert_eq!(preimages(&y, n, &spec).unwrap(), want, "{spec:?} {y}");
            }
        }
    }

    // two-step neighbourhood equals the all-pairs confusability scan
    #[test]
    fn nbhd_matches_pairwise_scan() {
        for (n, spec) in [
            (8, ChannelSpec::di(2, 2, 1)),
            (9, ChannelSpec::di(2, 3, 1)),
            (8, ChannelSpec::di(2, 3, 2)),
            (8, ChannelSpec::ds(2, 1, 1)),
            (8, ChannelSpec::ds(2, 1, 1).with_variant(Variant::Free)),
        ] {
            let balls: Vec<Vec<BitSequence>> =
                BitSequence::all(n).map(|x| ball(&x, &spec).unwrap()).collect();
            for x in BitSequence::all(n) {
                let bx = &balls[x.value() as usize];
                let want: Vec<BitSequence> = BitSequence::all(n)
                    .filter(|y| {
                        *y != x
                            && balls[y.value() as usize]
                                .iter()
                                .any(|w| bx.binary_search(w).is_ok())
                    })
                    .collect();
                let got = nbhd(&x, &spec).unwrap();
                assert_eq!(got, want, "{spec:?} {x}");
            }
        }
    }

    #[test]
    fn nbhd_symmetric_and_self_free() {
        let n = 9;
        let table = all_nbhds(n, &ChannelSpec::di(2, 2, 1)).unwrap();
        for x in BitSequence::all(n) {
            let nx = &table[x.value() as usize];
            assert!(nx.binary_search(&x).is_err());
            assert_eq!(*nx, nbhd(&x, &ChannelSpec::di(2, 2, 1)).unwrap());
            for y in nx {
                assert!(table[y.value() as usize].binary_search(&x).is_ok());
            }
        }
    }

    #[test]
    fn nbhd_ds_all_zeros_golden() {
        let x = BitSequence::zeros(10).unwrap();
        let n = nbhd_ds(&x, 1).unwrap();
        let spec = ChannelSpec::ds(2, 1, 1);
        let bx = ball(&x, &spec).unwrap();
        let oracle = BitSequence::all(10)
            .filter(|y| *y != x)
            .filter(|y| ball(y, &spec).unwrap().iter().any(|w| bx.binary_search(w).is_ok()))
            .count();
        assert_eq!(n.len(), oracle);
    }

    #[test]
    fn nbhd_guards() {
        assert!(nbhd_di(&bs("0101"), 2, 1).is_err());
        assert!(nbhd_ds(&bs("01"), 1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sampled_patterns_land_in_ball(v in any::<u64>(), i in 1usize..5, j in 0usize..6, b in any::<u8>()) {
                let x = BitSequence::raw(v, 14);
                let (t1, t2) = (3usize, 2usize);
                let i2 = i + t1 + j;
                let blk = |k: u8| BitSequence::raw(u64::from(k), t2);
                let p = BurstPattern::di(vec![Burst::new(i, t1, blk(b & 3)), Burst::new(i2, t1, blk(b >> 2 & 3))]);
                if let Ok(y) = apply(&x, &p) {
                    prop_assert!(ball_di(&x, 2, t1, t2).unwrap().binary_search(&y).is_ok());
                    prop_assert!(preimages(&y, 14, &ChannelSpec::di(2, t1, t2)).unwrap().contains(&x));
                }
            }
        }
    }
}
