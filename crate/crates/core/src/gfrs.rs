//! Prime-field arithmetic and Reed-Solomon codes.
//!
//! Codewords are evaluations `c_j = m(j)` of a message polynomial of degree
//! below `k` at the points `j = 1..=N`. Decoding computes syndromes against
//! the dual (generalised RS) parity check, runs Berlekamp-Massey, finds
//! error positions by a Chien-style scan over the evaluation points and
//! gets error values from Forney's formula.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

pub fn next_prime(from: u64) -> u64 {
    let mut q = from.max(2);
    while !is_prime(q) {
        q += 1;
    }
    q
}

/// Arithmetic modulo a prime `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    q: u64,
}

impl Field {
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(invalid(format!("{q} is not prime")));
        }
        if q >= 1 << 31 {
            return Err(invalid("field size must stay below 2^31"));
        }
        Ok(Field { q })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a % self.q) % self.q
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.q;
        a %= self.q;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.q) {
            None
        } else {
            Some(self.pow(a, self.q - 2))
        }
    }

    fn eval(&self, poly: &[u64], x: u64) -> u64 {
        poly.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

/// An `[N, k, N-k+1]_q` evaluation Reed-Solomon code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsCode {
    field: Field,
    length: usize,
    dimension: usize,
    // column multipliers of the parity check
    multipliers: Vec<u64>,
}

/// A successful decode: the codeword and the number of corrected symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub codeword: Vec<u64>,
    pub corrected: usize,
}

impl RsCode {
    pub fn new(q: u64, length: usize, dimension: usize) -> Result<Self> {
        let field = Field::new(q)?;
        if length == 0 || length as u64 >= q {
            return Err(invalid(format!(
                "length {length} needs 1 <= N < q = {q} distinct nonzero points"
            )));
        }
        if dimension == 0 || dimension >= length {
            return Err(invalid(format!(
                "dimension {dimension} must lie in [1, N) for N = {length}"
            )));
        }
        let multipliers = (1..=length as u64)
            .map(|j| {
                let prod = (1..=length as u64)
                    .filter(|&l| l != j)
                    .fold(1, |acc, l| field.mul(acc, field.sub(j, l)));
                field.inv(prod).expect("distinct points")
            })
            .collect();
        Ok(RsCode {
            field,
            length,
            dimension,
            multipliers,
        })
    }

    /// Code with the given design distance: `k = N - d_min + 1`.
    pub fn with_distance(q: u64, length: usize, d_min: usize) -> Result<Self> {
        if d_min < 2 || d_min > length {
            return Err(invalid(format!("d_min {d_min} impossible for N = {length}")));
        }
        Self::new(q, length, length + 1 - d_min)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn q(&self) -> u64 {
        self.field.q
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn d_min(&self) -> usize {
        self.length - self.dimension + 1
    }

    pub fn radius(&self) -> usize {
        (self.d_min() - 1) / 2
    }

    pub fn redundancy(&self) -> usize {
        self.length - self.dimension
    }

    fn check_len(&self, w: &[u64]) -> Result<()> {
        if w.len() != self.length {
            return Err(Error::LengthMismatch {
                left: w.len(),
                right: self.length,
            });
        }
        if let Some(s) = w.iter().find(|&&s| s >= self.q()) {
            return Err(invalid(format!("symbol {s} not in GF({})", self.q())));
        }
        Ok(())
    }

    /// Evaluates the message polynomial at `1..=N`.
    pub fn encode(&self, msg: &[u64]) -> Result<Vec<u64>> {
        if msg.len() != self.dimension {
            return Err(Error::LengthMismatch {
                left: msg.len(),
                right: self.dimension,
            });
        }
        if let Some(s) = msg.iter().find(|&&s| s >= self.q()) {
            return Err(invalid(format!("symbol {s} not in GF({})", self.q())));
        }
        Ok((1..=self.length as u64)
            .map(|x| self.field.eval(msg, x))
            .collect())
    }

    /// Syndromes `S_i = sum_j v_j w_j j^i`, `i < N - k`.
    pub fn syndrome(&self, w: &[u64]) -> Result<Vec<u64>> {
        self.check_len(w)?;
        let f = self.field;
        Ok((0..self.redundancy() as u64)
            .map(|i| {
                w.iter().enumerate().fold(0, |acc, (j, &s)| {
                    let term = f.mul(f.mul(self.multipliers[j], s), f.pow(j as u64 + 1, i));
                    f.add(acc, term)
                })
            })
            .collect())
    }

    pub fn is_codeword(&self, w: &[u64]) -> Result<bool> {
        Ok(self.syndrome(w)?.iter().all(|&s| s == 0))
    }

    /// Unique codeword within the correction radius, or `None`.
    pub fn decode(&self, w: &[u64]) -> Result<Option<Decoded>> {
        let syn = self.syndrome(w)?;
        if syn.iter().all(|&s| s == 0) {
            return Ok(Some(Decoded {
                codeword: w.to_vec(),
                corrected: 0,
            }));
        }
        let f = self.field;
        let lambda = berlekamp_massey(&f, &syn);
        let degree = lambda.len() - 1;
        if degree == 0 || degree > self.radius() {
            return Ok(None);
        }
        // error locators are the evaluation points j with Lambda(1/j) = 0
        let positions: Vec<usize> = (1..=self.length as u64)
            .filter(|&j| f.eval(&lambda, f.inv(j).unwrap()) == 0)
            .map(|j| j as usize - 1)
            .collect();
        if positions.len() != degree {
            return Ok(None);
        }
        // Omega = S * Lambda mod z^(N-k)
        let r = self.redundancy();
        let mut omega = vec![0u64; r];
        for (a, &s) in syn.iter().enumerate() {
            for (b, &l) in lambda.iter().enumerate() {
                if a + b < r {
                    omega[a + b] = f.add(omega[a + b], f.mul(s, l));
                }
            }
        }
        let dlambda: Vec<u64> = lambda
            .iter()
            .enumerate()
            .skip(1)
            .map(|(e, &c)| f.mul(c, e as u64 % f.q()))
            .collect();
        let mut out = w.to_vec();
        for &p in &positions {
            let x = p as u64 + 1;
            let xinv = f.inv(x).unwrap();
            let den = f.eval(&dlambda, xinv);
            let Some(den_inv) = f.inv(den) else {
                return Ok(None);
            };
            // Y = -X * Omega(1/X) / Lambda'(1/X), error value e = Y / v
            let y = f.neg(f.mul(f.mul(x, f.eval(&omega, xinv)), den_inv));
            let e = f.mul(y, f.inv(self.multipliers[p]).unwrap());
            out[p] = f.sub(out[p], e);
        }
        if !self.is_codeword(&out)? {
            return Ok(None);
        }
        Ok(Some(Decoded {
            codeword: out,
            corrected: degree,
        }))
    }

    /// Exhaustive nearest-codeword search; the oracle for small codes.
    pub fn decode_exhaustive(&self, w: &[u64]) -> Result<Option<Decoded>> {
        self.check_len(w)?;
        let total = (self.q() as u128).pow(self.dimension as u32);
        if self.length > 12 || total > 1 << 24 {
            return Err(Error::BudgetExceeded {
                what: format!("exhaustive RS search over {total} codewords"),
                limit: 1 << 24,
            });
        }
        let mut found: Option<Decoded> = None;
        let mut msg = vec![0u64; self.dimension];
        for _ in 0..total {
            let c = self.encode(&msg)?;
            let dist = c.iter().zip(w).filter(|(a, b)| a != b).count();
            if dist <= self.radius() {
                found = Some(Decoded {
                    codeword: c,
                    corrected: dist,
                });
            }
            for s in msg.iter_mut() {
                *s += 1;
                if *s < self.q() {
                    break;
                }
                *s = 0;
            }
        }
        Ok(found)
    }

    /// Decodes in the coset `C + u`.
    pub fn coset_decode(&self, w: &[u64], u: &[u64]) -> Result<Option<Decoded>> {
        self.check_len(u)?;
        let f = self.field;
        let shifted: Vec<u64> = w.iter().zip(u).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(self.decode(&shifted)?.map(|d| Decoded {
            codeword: d.codeword.iter().zip(u).map(|(&a, &b)| f.add(a, b)).collect(),
            corrected: d.corrected,
        }))
    }

    /// Canonical coset leader with the given syndrome: zero on the first
    /// `k` positions.
    pub fn coset_leader(&self, member: &[u64]) -> Result<Vec<u64>> {
        self.check_len(member)?;
        let f = self.field;
        let k = self.dimension;
        // interpolate through the first k points, then subtract
        let xs: Vec<u64> = (1..=k as u64).collect();
        let mut out = Vec::with_capacity(self.length);
        for j in 1..=self.length as u64 {
            let mut c = 0;
            for (a, &xa) in xs.iter().enumerate() {
                let mut basis = 1;
                for &xb in &xs {
                    if xb != xa {
                        basis = f.mul(basis, f.mul(f.sub(j, xb), f.inv(f.sub(xa, xb)).unwrap()));
                    }
                }
                c = f.add(c, f.mul(member[a], basis));
            }
            out.push(f.sub(member[j as usize - 1], c));
        }
        Ok(out)
    }
}

fn berlekamp_massey(f: &Field, s: &[u64]) -> Vec<u64> {
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bb = 1u64;
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l.min(c.len() - 1) {
            d = f.add(d, f.mul(c[i], s[n - i]));
        }
        if d == 0 {
            m += 1;
            continue;
        }
        let coef = f.mul(d, f.inv(bb).unwrap());
        let t = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + m] = f.sub(c[i + m], f.mul(coef, bi));
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = t;
            bb = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    c.truncate(l + 1);
    c.resize(l + 1, 0);
    c
}

/// The most populous coset of `code` among `population` (ties broken by the
/// smallest syndrome), returned as its canonical leader and bucket size.
pub fn best_coset<'a, I>(code: &RsCode, population: I) -> Result<(Vec<u64>, usize)>
where
    I: IntoIterator<Item = &'a Vec<u64>>,
{
    let mut buckets: BTreeMap<Vec<u64>, (usize, &Vec<u64>)> = BTreeMap::new();
    for w in population {
        let s = code.syndrome(w)?;
        buckets.entry(s).or_insert((0, w)).0 += 1;
    }
    let best = buckets
        .iter()
        .fold(None::<(&Vec<u64>, usize, &Vec<u64>)>, |acc, (s, &(c, w))| match acc {
            Some((_, bc, _)) if bc >= c => acc,
            _ => Some((s, c, w)),
        });
    let (_, size, member) = best.ok_or(Error::EmptyInput)?;
    Ok((code.coset_leader(member)?, size))
}

/// Smallest prime above both the symbol count `ceil(n / (t-1))` and the
/// largest symbol value `2^(t-1) - 1`; `t = 1` reads `x` bit by bit.
/// Strictly above the count so every position gets its own nonzero point.
pub fn choose_q(n: usize, t: usize) -> Result<u64> {
    let (symbols, alphabet) = if t <= 1 {
        (n as u64, 2)
    } else {
        (n.div_ceil(t - 1) as u64, 1u64 << (t - 1))
    };
    Ok(next_prime((symbols + 1).max(alphabet + 1)))
}
