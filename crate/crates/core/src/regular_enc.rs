//! Ranking encoder for d-regular sequences and the first-row
//! regularisation map.
//!
//! Counting uses a DP over states `(last symbol, gap since the last 00,
//! gap since the last 11)`, where a gap is the distance from the end of the
//! most recent pair to the current position, capped at `W - 1` for window
//! length `W`. Once `W` symbols are placed every prefix must have both gaps
//! at most `W - 2`, which is exactly "every length-W window holds 00 and 11".

use crate::error::{invalid, Error, Result};
use crate::seqcore::{fold, regularity_window, BitSequence, MAX_LEN};

/// Bijection between `[0, count)` and the d-regular words of length `n`
/// in lexicographic order.
#[derive(Clone, Debug)]
pub struct RegularCode {
    n: usize,
    d: f64,
    w: usize,
    // completions[p][state]: valid suffixes after placing p symbols
    completions: Vec<Vec<u128>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct State {
    last: u8, // 2 = no symbol yet
    g00: usize,
    g11: usize,
}

impl RegularCode {
    pub fn new(n: usize, d: f64) -> Result<Self> {
        if n == 0 || n > MAX_LEN {
            return Err(invalid(format!("length {n} outside [1, {MAX_LEN}]")));
        }
        if d.is_nan() || d <= 0.0 {
            return Err(invalid("d must be positive"));
        }
        let w = regularity_window(n, d);
        let mut code = RegularCode {
            n,
            d,
            w,
            completions: Vec::new(),
        };
        code.fill();
        Ok(code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn window(&self) -> usize {
        self.w
    }

    fn vacuous(&self) -> bool {
        self.w > self.n
    }

    fn cap(&self) -> usize {
        self.w.saturating_sub(1).max(1)
    }

    fn index(&self, s: State) -> usize {
        let c = self.cap() + 1;
        (s.last as usize * c + s.g00) * c + s.g11
    }

    fn state_count(&self) -> usize {
        let c = self.cap() + 1;
        3 * c * c
    }

    fn start(&self) -> State {
        State {
            last: 2,
            g00: self.cap(),
            g11: self.cap(),
        }
    }

    fn step(&self, s: State, b: u8) -> State {
        let cap = self.cap();
        let bump = |g: usize| (g + 1).min(cap);
        let (g00, g11) = match (s.last, b) {
            (0, 0) => (0, bump(s.g11)),
            (1, 1) => (bump(s.g00), 0),
            _ => (bump(s.g00), bump(s.g11)),
        };
        State { last: b, g00, g11 }
    }

    // state reached after p symbols is admissible
    fn ok(&self, p: usize, s: State) -> bool {
        self.vacuous() || p < self.w || (s.g00 + 2 <= self.w && s.g11 + 2 <= self.w)
    }

    fn fill(&mut self) {
        if self.vacuous() {
            return;
        }
        let k = self.state_count();
        let cap = self.cap();
        let mut table = vec![vec![0u128; k]; self.n + 1];
        let states: Vec<State> = (0..3u8)
            .flat_map(|last| {
                (0..=cap).flat_map(move |g00| (0..=cap).map(move |g11| State { last, g00, g11 }))
            })
            .collect();
        for s in &states {
            if self.ok(self.n, *s) {
                table[self.n][self.index(*s)] = 1;
            }
        }
        for p in (0..self.n).rev() {
            for s in &states {
                if !self.ok(p, *s) {
                    continue;
                }
                let mut total = 0u128;
                for b in 0..2 {
                    let t = self.step(*s, b);
                    if self.ok(p + 1, t) {
                        total += table[p + 1][self.index(t)];
                    }
                }
                table[p][self.index(*s)] = total;
            }
        }
        self.completions = table;
    }

    fn completions_from(&self, p: usize, s: State) -> u128 {
        if self.vacuous() {
            return 1u128 << (self.n - p);
        }
        if !self.ok(p, s) {
            return 0;
        }
        self.completions[p][self.index(s)]
    }

    /// Number of d-regular words of length `n`.
    pub fn count(&self) -> u128 {
        self.completions_from(0, self.start())
    }

    /// Whether the code carries at least `n - 1` bits.
    pub fn one_bit_redundancy(&self) -> bool {
        self.count() >= 1u128 << (self.n - 1)
    }

    pub fn encode(&self, msg: u128) -> Result<BitSequence> {
        let count = self.count();
        if msg >= count {
            return Err(Error::MessageOutOfRange { msg, count });
        }
        let mut rest = msg;
        let mut s = self.start();
        let mut v = 0u64;
        for p in 0..self.n {
            let zero = self.step(s, 0);
            let c0 = self.completions_from(p + 1, zero);
            let b = if rest < c0 {
                0
            } else {
                rest -= c0;
                1
            };
            s = self.step(s, b);
            v = (v << 1) | b as u64;
        }
        Ok(BitSequence::raw(v, self.n))
    }

    pub fn decode(&self, x: &BitSequence) -> Result<u128> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.n,
            });
        }
        let mut rank = 0u128;
        let mut s = self.start();
        for p in 0..self.n {
            let b = x.bit(p);
            if b == 1 {
                rank += self.completions_from(p + 1, self.step(s, 0));
            }
            s = self.step(s, b);
            if !self.ok(p + 1, s) {
                return Err(invalid(format!("{x} is not {}-regular", self.d)));
            }
        }
        Ok(rank)
    }
}

pub fn reg_enc(msg: u128, n: usize, d: f64) -> Result<BitSequence> {
    RegularCode::new(n, d)?.encode(msg)
}

pub fn reg_dec(x: &BitSequence, d: f64) -> Result<u128> {
    RegularCode::new(x.len(), d)?.decode(x)
}

/// Maps length-`n` words to length `N + 1` words (`N` = `n` rounded up to a
/// multiple of `t1 - t2`) whose first folded row is d-regular. The word is
/// zero-padded first; the first row is then replaced by the regular word
/// ranked by its value, and the extra symbol lands at position `N + 1`.
/// Every other position keeps its symbol.
#[derive(Clone, Debug)]
pub struct FirstRowMap {
    n: usize,
    delta: usize,
    padded: usize,
    code: RegularCode,
}

impl FirstRowMap {
    pub fn new(n: usize, t1: usize, t2: usize, d: f64) -> Result<Self> {
        if t1 <= t2 || t2 == 0 {
            return Err(invalid(format!("need t1 > t2 >= 1, got ({t1}, {t2})")));
        }
        let delta = t1 - t2;
        let padded = n.div_ceil(delta) * delta;
        if padded + 1 > MAX_LEN {
            return Err(Error::TooLong {
                len: padded + 1,
                max: MAX_LEN,
            });
        }
        let m = padded / delta;
        let code = RegularCode::new(m + 1, d)?;
        if code.count() < 1u128 << m {
            return Err(invalid(format!(
                "only {} {d}-regular words of length {}, need {}",
                code.count(),
                m + 1,
                1u128 << m
            )));
        }
        Ok(FirstRowMap {
            n,
            delta,
            padded,
            code,
        })
    }

    pub fn output_len(&self) -> usize {
        self.padded + 1
    }

    pub fn encode(&self, x: &BitSequence) -> Result<BitSequence> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.n,
            });
        }
        let x = x.pad_zeros(self.padded - self.n)?;
        let row = fold(&x, self.delta)?.row(1);
        let u = self.code.encode(u128::from(row.value()))?;
        let mut y = x.concat(&BitSequence::raw(0, 1));
        for c in 0..u.len() {
            y = y.with_bit(c * self.delta, u.bit(c));
        }
        Ok(y)
    }

    /// Inverse of [`FirstRowMap::encode`]; the padding is stripped.
    pub fn decode(&self, y: &BitSequence) -> Result<BitSequence> {
        if y.len() != self.output_len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: self.output_len(),
            });
        }
        let m = self.padded / self.delta;
        let mut u = 0u64;
        for c in 0..=m {
            u = (u << 1) | u64::from(y.bit(c * self.delta));
        }
        let msg = self.code.decode(&BitSequence::raw(u, m + 1))?;
        let row = BitSequence::raw(msg as u64, m);
        let mut x = y.slice(0, self.padded);
        for c in 0..m {
            x = x.with_bit(c * self.delta, row.bit(c));
        }
        Ok(x.slice(0, self.n))
    }
}

pub fn first_row_reg_enc(x: &BitSequence, t1: usize, t2: usize, d: f64) -> Result<BitSequence> {
    FirstRowMap::new(x.len(), t1, t2, d)?.encode(x)
}
