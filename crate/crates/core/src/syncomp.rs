//! Syndrome compression.
//!
//! A word `x` is summarised by `(a(x), h(x) mod a(x))` where `h` is an
//! injective packing of power sums and `a(x)` is the least modulus that
//! keeps `x` apart from every confusable word. Tables of these values are
//! built once per window length and channel and cached.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelSpec, Model, Variant};
use crate::error::{invalid, Error, Result};
use crate::seqcore::BitSequence;

/// `s_k = sum_i i^k x_i` for `k = 0..=order`, positions 1-based.
pub fn power_sums(x: &BitSequence, order: usize) -> Vec<u128> {
    let mut out = vec![0u128; order + 1];
    for (p, b) in x.iter().enumerate() {
        if b == 1 {
            let i = (p + 1) as u128;
            let mut pw = 1u128;
            for s in out.iter_mut() {
                *s += pw;
                pw *= i;
            }
        }
    }
    out
}

// Digit bound of s_k: one more than its largest value.
fn radix(n: usize, k: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc + BigUint::from(i).pow(k as u32))
}

/// Power sums up to `order` packed mixed-radix into one integer; injective
/// on the sum vector. Zero for the all-zeros word.
pub fn h_syndrome(x: &BitSequence, order: usize) -> Result<BigUint> {
    if order == 0 {
        return Err(invalid("the syndrome order must be at least 1"));
    }
    let sums = power_sums(x, order);
    let mut acc = BigUint::zero();
    for k in (0..=order).rev() {
        acc = acc * radix(x.len(), k) + BigUint::from(sums[k]);
    }
    Ok(acc)
}

// `h mod a` from the sum vector, with `radix mod a` precomputed.
fn residue_from(sums: &[u128], radix_mod: &[u128], a: u64) -> u64 {
    let a = u128::from(a);
    let mut acc = 0u128;
    for k in (0..sums.len()).rev() {
        acc = (acc * radix_mod[k] + sums[k] % a) % a;
    }
    acc as u64
}

fn radix_mods(n: usize, order: usize, a: u64) -> Vec<u128> {
    let m = BigUint::from(a);
    (0..=order)
        .map(|k| (radix(n, k) % &m).to_u128().unwrap_or(0))
        .collect()
}

/// `h(x) mod a`.
pub fn h_residue(x: &BitSequence, order: usize, a: u64) -> u64 {
    residue_from(&power_sums(x, order), &radix_mods(x.len(), order, a), a)
}

/// `(a, h mod a)` packed as `(a - 1) * 2^width + residue`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompressedSyndrome {
    pub a: u64,
    pub residue: u64,
    pub enc: u128,
}

impl CompressedSyndrome {
    pub fn pack(a: u64, residue: u64, width: u32) -> Result<Self> {
        if a == 0 || residue >= a || (width < 64 && residue >> width != 0) {
            return Err(invalid(format!(
                "cannot pack a = {a}, residue = {residue} in {width} bits"
            )));
        }
        let enc = (u128::from(a - 1) << width) | u128::from(residue);
        Ok(CompressedSyndrome { a, residue, enc })
    }

    pub fn unpack(enc: u128, width: u32) -> Result<Self> {
        let residue = (enc & ((1u128 << width) - 1)) as u64;
        let a = u64::try_from(enc >> width)
            .ok()
            .and_then(|v| v.checked_add(1))
            .ok_or_else(|| invalid("packed syndrome out of range"))?;
        Self::pack(a, residue, width)
    }
}

/// Least `a >= 2` that divides no difference `h(x) - h(x')` for `x'` in
/// `nbhd`.
pub fn compress_a(x: &BitSequence, nbhd: &[BitSequence], order: usize) -> Result<u64> {
    let own = power_sums(x, order);
    let others: Vec<Vec<u128>> = nbhd.iter().map(|y| power_sums(y, order)).collect();
    if others.contains(&own) {
        return Err(Error::NotSeparating);
    }
    let packer = Packer::new(x.len(), order);
    Ok(packer.least_modulus(&own, others.iter().map(Vec::as_slice)))
}

// Mixed-radix packing of sum vectors, exact in u128 when it fits.
struct Packer {
    n: usize,
    order: usize,
    radices: Option<Vec<u128>>,
}

impl Packer {
    fn new(n: usize, order: usize) -> Self {
        let radices: Option<Vec<u128>> = (0..=order).map(|k| radix(n, k).to_u128()).collect();
        // the packed value must fit: product of all radices
        let fits = radices.as_ref().is_some_and(|r| {
            r.iter()
                .try_fold(1u128, |acc, &v| acc.checked_mul(v))
                .is_some()
        });
        Packer {
            n,
            order,
            radices: if fits { radices } else { None },
        }
    }

    fn exact(&self, sums: &[u128]) -> Option<u128> {
        let r = self.radices.as_ref()?;
        Some((0..sums.len()).rev().fold(0u128, |acc, k| acc * r[k] + sums[k]))
    }

    fn least_modulus<'a>(&self, own: &[u128], others: impl Iterator<Item = &'a [u128]>) -> u64 {
        if let Some(h) = self.exact(own) {
            let diffs: Vec<u128> = others
                .map(|s| self.exact(s).map_or(0, |v| v.abs_diff(h)))
                .collect();
            let mut a = 2u128;
            while diffs.iter().any(|&d| d % a == 0) {
                a += 1;
            }
            return a as u64;
        }
        let others: Vec<&[u128]> = others.collect();
        let mut a = 2u64;
        loop {
            let rm = radix_mods(self.n, self.order, a);
            let r = residue_from(own, &rm, a);
            if others.iter().all(|s| residue_from(s, &rm, a) != r) {
                return a;
            }
            a += 1;
        }
    }
}

/// Parameters a decoder needs to interpret packed syndromes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeMeta {
    pub length: usize,
    pub spec: ChannelSpec,
    /// Power-sum order `K`.
    pub order: usize,
    /// Packing width `B`.
    pub width: u32,
    pub a_max: u64,
}

/// `(a(x), h(x) mod a(x))` for every word of one length under one channel.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    meta: SyndromeMeta,
    entries: Vec<CompressedSyndrome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub length: usize,
    pub spec: ChannelSpec,
    pub words: usize,
    pub pairs: usize,
    pub violations: usize,
    pub first_violation: Option<(BitSequence, BitSequence)>,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl SyndromeTable {
    /// Builds the table; the order `K` is the least one at which `h`
    /// separates every word from its whole neighbourhood.
    pub fn build(length: usize, spec: ChannelSpec) -> Result<Self> {
        if length == 0 {
            return Err(invalid("window length must be positive"));
        }
        let nbhds = channel::all_nbhds(length, &spec)?;
        let words: Vec<BitSequence> = BitSequence::all(length).collect();
        let mut order = 1;
        let sums = loop {
            let sums: Vec<Vec<u128>> = words.iter().map(|x| power_sums(x, order)).collect();
            let clash = (0..words.len()).into_par_iter().any(|v| {
                nbhds[v]
                    .iter()
                    .any(|y| sums[y.value() as usize] == sums[v])
            });
            if !clash {
                break sums;
            }
            if order >= length {
                return Err(Error::NotSeparating);
            }
            order += 1;
        };
        let packer = Packer::new(length, order);
        let moduli: Vec<u64> = (0..words.len())
            .into_par_iter()
            .map(|v| {
                let others = nbhds[v].iter().map(|y| sums[y.value() as usize].as_slice());
                packer.least_modulus(&sums[v], others)
            })
            .collect();
        let a_max = moduli.iter().copied().max().unwrap_or(2);
        let width = 64 - (a_max - 1).leading_zeros();
        let entries = words
            .iter()
            .zip(&moduli)
            .map(|(x, &a)| CompressedSyndrome::pack(a, h_residue(x, order, a), width))
            .collect::<Result<_>>()?;
        Ok(SyndromeTable {
            meta: SyndromeMeta {
                length,
                spec,
                order,
                width,
                a_max,
            },
            entries,
        })
    }

    pub fn meta(&self) -> &SyndromeMeta {
        &self.meta
    }

    pub fn length(&self) -> usize {
        self.meta.length
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.meta.spec
    }

    /// Exclusive upper bound on every packed value.
    pub fn enc_bound(&self) -> u128 {
        u128::from(self.meta.a_max) << self.meta.width
    }

    pub fn get(&self, x: &BitSequence) -> Result<CompressedSyndrome> {
        if x.len() != self.meta.length {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.meta.length,
            });
        }
        Ok(self.entries[x.value() as usize])
    }

    /// The unique word of this length whose ball contains `corrupted` and
    /// whose syndrome is `f`.
    pub fn invert(&self, corrupted: &BitSequence, f: &CompressedSyndrome) -> Result<BitSequence> {
        let found: Vec<BitSequence> = channel::preimages(corrupted, self.meta.length, &self.meta.spec)?
            .into_iter()
            .filter(|w| self.entries[w.value() as usize].enc == f.enc)
            .collect();
        match found.len() {
            0 => Err(Error::NoCandidate),
            1 => Ok(found[0]),
            k => Err(Error::Ambiguous(k)),
        }
    }

    /// Recomputes every neighbourhood and checks `a(x)` against exact
    /// big-integer differences of `h`.
    pub fn verify_separation(&self) -> Result<SeparationReport> {
        let meta = &self.meta;
        let words: Vec<BitSequence> = BitSequence::all(meta.length).collect();
        let per_word: Vec<(usize, Option<BitSequence>, BitSequence)> = words
            .par_iter()
            .map(|x| -> Result<_> {
                let a = BigUint::from(self.entries[x.value() as usize].a);
                let hx = h_syndrome(x, meta.order)?;
                let mut bad = None;
                let nb = channel::nbhd(x, &meta.spec)?;
                for y in &nb {
                    let hy = h_syndrome(y, meta.order)?;
                    let diff = if hx >= hy { &hx - &hy } else { &hy - &hx };
                    if (&diff % &a).is_zero() && bad.is_none() {
                        bad = Some(*y);
                    }
                }
                Ok((nb.len(), bad, *x))
            })
            .collect::<Result<_>>()?;
        let mut report = SeparationReport {
            length: meta.length,
            spec: meta.spec,
            words: words.len(),
            pairs: 0,
            violations: 0,
            first_violation: None,
        };
        for (pairs, bad, x) in per_word {
            report.pairs += pairs;
            if let Some(y) = bad {
                report.violations += 1;
                report.first_violation.get_or_insert((x, y));
            }
        }
        Ok(report)
    }
}

type TableKey = (usize, ChannelSpec);

fn cache() -> &'static Mutex<HashMap<TableKey, Arc<SyndromeTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<SyndromeTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The cached table for `(length, spec)`, built on first use.
pub fn table(length: usize, spec: ChannelSpec) -> Result<Arc<SyndromeTable>> {
    let key = (length, spec);
    if let Some(t) = cache().lock().expect("syndrome cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let built = Arc::new(SyndromeTable::build(length, spec)?);
    Ok(cache()
        .lock()
        .expect("syndrome cache poisoned")
        .entry(key)
        .or_insert(built)
        .clone())
}

pub fn one_burst_spec(t1: usize, t2: usize) -> ChannelSpec {
    ChannelSpec::di(1, t1, t2)
}

pub fn two_burst_spec(t1: usize, t2: usize) -> ChannelSpec {
    ChannelSpec::di(2, t1, t2)
}

/// Two `(1, t'-1)` DS bursts with unconstrained substitutions.
pub fn row_spec(t_prime: usize) -> ChannelSpec {
    ChannelSpec::new(2, 1, t_prime.saturating_sub(1), Model::Ds, Variant::Free)
}

/// Separates `x` from words confusable under one `(t1,t2)`-DI burst.
pub fn f1(x: &BitSequence, t1: usize, t2: usize) -> Result<CompressedSyndrome> {
    table(x.len(), one_burst_spec(t1, t2))?.get(x)
}

/// Separates `x` from words confusable under two `(t1,t2)`-DI bursts.
pub fn f2(x: &BitSequence, t1: usize, t2: usize) -> Result<CompressedSyndrome> {
    table(x.len(), two_burst_spec(t1, t2))?.get(x)
}

/// Separates `x` from words confusable under two `(1,t'-1)`-DS bursts.
pub fn f_ds(x: &BitSequence, t_prime: usize) -> Result<CompressedSyndrome> {
    if t_prime < 2 {
        return Err(invalid("t' must be at least 2"));
    }
    table(x.len(), row_spec(t_prime))?.get(x)
}

/// Recovers the window of length `length` from its corrupted image under
/// `spec` and its syndrome.
pub fn invert_window(
    corrupted: &BitSequence,
    f: &CompressedSyndrome,
    spec: ChannelSpec,
    length: usize,
) -> Result<BitSequence> {
    table(length, spec)?.invert(corrupted, f)
}

fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

/// `ceil(t1 / (t1 - t2))`.
pub fn t_prime(t1: usize, t2: usize) -> Result<usize> {
    if t1 <= t2 || t2 == 0 {
        return Err(invalid(format!("need t1 > t2 >= 1, got ({t1},{t2})")));
    }
    Ok(t1.div_ceil(t1 - t2))
}

/// Closed-form neighbourhood size. `Di`: two `(t1,t2)`-DI bursts on length
/// `n`. `Ds`: two `(1,t'-1)`-DS bursts on the first row of the width
/// `t1 - t2` fold, of length `ceil(n / (t1 - t2))`.
pub fn complexity_card(n: usize, t1: usize, t2: usize, model: Model) -> Result<BigUint> {
    match model {
        Model::Di => {
            if t1 < 2 || t2 == 0 || n + 2 < 2 * t1 {
                return Err(invalid(format!("no closed form for ({t1},{t2}) at n = {n}")));
            }
            let exp = if t2 >= 2 { 2 * (t1 + t2) - 8 } else { 2 * t1 - 4 };
            Ok((binom(n + 2 - 2 * t1, 2) * binom(n + 2 * t2 + 1 - 2 * t1, 2)) << exp)
        }
        Model::Ds => {
            let tp = t_prime(t1, t2)?;
            let rows = n.div_ceil(t1 - t2);
            if rows + 2 < 2 * tp {
                return Err(invalid(format!("first row of length {rows} is too short")));
            }
            // sum_i C(t'-2, i) = 2^(t'-2)
            Ok((binom(rows + 2 - 2 * tp, 2) * binom(rows + 3 - 2 * tp, 2)) << (4 * (tp - 2)))
        }
    }
}

/// `log2` of a big integer, accurate to double precision.
pub fn log2_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(53);
    let top = (v >> shift).to_f64().unwrap_or(f64::NAN);
    top.log2() + shift as f64
}

/// A parameter row of the neighbourhood-size comparison table.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexityRow {
    pub row: usize,
    pub n: usize,
    pub t1: usize,
    pub t2: usize,
    pub t_prime: Option<usize>,
    #[serde(serialize_with = "decimal")]
    pub di: BigUint,
    #[serde(serialize_with = "decimal_opt")]
    pub ds: Option<BigUint>,
    pub di_log2: f64,
    pub ds_log2: Option<f64>,
    /// Reference exponents the table tabulates.
    pub ref_di_exp: u32,
    pub ref_ds_exp: u32,
    /// Rows whose second column counts Reed-Solomon operations.
    pub rs_row: bool,
}

fn decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn decimal_opt<S: serde::Serializer>(
    v: &Option<BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

const REFERENCE_ROWS: [(usize, usize, usize, u32, u32); 15] = [
    (1024, 10, 8, 66, 46),
    (512, 10, 8, 62, 42),
    (256, 10, 8, 58, 38),
    (1024, 10, 7, 64, 40),
    (512, 10, 7, 60, 36),
    (256, 10, 7, 56, 32),
    (1024, 10, 6, 62, 34),
    (512, 10, 6, 58, 30),
    (256, 10, 6, 54, 26),
    (1024, 10, 1, 54, 26),
    (512, 10, 1, 50, 22),
    (256, 10, 1, 46, 18),
    (512, 10, 10, 74, 15),
    (512, 5, 5, 54, 17),
    (512, 2, 2, 34, 19),
];

/// Rows 1-12 and the three equal-length rows (numbered 14-16).
pub fn complexity_table() -> Result<Vec<ComplexityRow>> {
    REFERENCE_ROWS
        .iter()
        .enumerate()
        .map(|(k, &(n, t1, t2, pdi, pds))| {
            let di = complexity_card(n, t1, t2, Model::Di)?;
            let rs_row = t1 == t2;
            let (tp, ds) = if rs_row {
                (None, None)
            } else {
                (Some(t_prime(t1, t2)?), Some(complexity_card(n, t1, t2, Model::Ds)?))
            };
            Ok(ComplexityRow {
                row: if rs_row { k + 2 } else { k + 1 },
                n,
                t1,
                t2,
                t_prime: tp,
                di_log2: log2_big(&di),
                ds_log2: ds.as_ref().map(log2_big),
                di,
                ds,
                ref_di_exp: pdi,
                ref_ds_exp: pds,
                rs_row,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitSequence {
        s.parse().unwrap()
    }

    #[test]
    fn h_basics() {
        for k in 1..4 {
            assert!(h_syndrome(&BitSequence::zeros(9).unwrap(), k).unwrap().is_zero());
        }
        let x = bs("1011001");
        assert_eq!(power_sums(&x, 2), vec![4, 1 + 3 + 4 + 7, 1 + 9 + 16 + 49]);
        assert!(h_syndrome(&x, 0).is_err());
    }

    #[test]
    fn pack_round_trip() {
        let c = CompressedSyndrome::pack(13, 5, 4).unwrap();
        assert_eq!(c.enc, (12 << 4) | 5);
        assert_eq!(CompressedSyndrome::unpack(c.enc, 4).unwrap(), c);
        assert!(CompressedSyndrome::pack(4, 4, 4).is_err());
        assert!(CompressedSyndrome::pack(40, 17, 4).is_err());
    }

    #[test]
    fn least_modulus_edges() {
        let x = bs("0110");
        assert_eq!(compress_a(&x, &[], 2).unwrap(), 2);
        // h = 27 and 48: the difference is odd
        assert_eq!(compress_a(&x, &[bs("0111")], 1).unwrap(), 2);
        assert!(matches!(compress_a(&x, &[x], 1), Err(Error::NotSeparating)));
    }

    #[test]
    fn two_burst_table_separates_at_length_10() {
        let t = table(10, two_burst_spec(2, 1)).unwrap();
        let r = t.verify_separation().unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(t.meta().order >= 1);
        for x in BitSequence::all(10) {
            let f = t.get(&x).unwrap();
            assert!(f.residue < f.a && f.a <= t.meta().a_max);
        }
    }

    #[test]
    fn one_burst_inversion_length_10() {
        let spec = one_burst_spec(2, 1);
        let t = table(10, spec).unwrap();
        assert!(t.verify_separation().unwrap().passed());
        for x in BitSequence::all(10) {
            let f = t.get(&x).unwrap();
            for y in channel::ball(&x, &spec).unwrap() {
                assert_eq!(t.invert(&y, &f).unwrap(), x);
            }
        }
    }

    #[test]
    fn two_burst_inversion_length_12() {
        let spec = two_burst_spec(2, 1);
        let t = table(12, spec).unwrap();
        for v in (0..4096u64).step_by(7) {
            let x = BitSequence::from_value(v, 12).unwrap();
            let f = t.get(&x).unwrap();
            for y in channel::ball(&x, &spec).unwrap() {
                assert_eq!(t.invert(&y, &f).unwrap(), x);
            }
        }
    }

    #[test]
    fn row_syndrome_golden() {
        let z = BitSequence::zeros(12).unwrap();
        let f = f_ds(&z, 2).unwrap();
        let again = f_ds(&z, 2).unwrap();
        assert_eq!(f, again);
        assert_eq!((f.a, f.residue), (13, 0));
        assert!(f_ds(&z, 1).is_err());
    }

    #[test]
    fn serialization_keeps_f1() {
        let x = bs("01101001");
        let f = f1(&x, 3, 1).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<CompressedSyndrome>(&json).unwrap(), f);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(t_prime(10, 7).unwrap(), 4);
        assert_eq!(t_prime(10, 2).unwrap(), 2);
        assert_eq!(t_prime(3, 1).unwrap(), 2);
        assert!(t_prime(2, 2).is_err());
        let ds = complexity_card(256, 10, 2, Model::Ds).unwrap();
        assert_eq!(ds, BigUint::from(435u32 * 465));
        assert_eq!(ds, BigUint::from(202_275u32));
        let di = complexity_card(256, 10, 2, Model::Di).unwrap();
        assert_eq!(di, BigUint::from(28_203u64 * 28_920) << 16);
        assert!((log2_big(&di) - 45.6).abs() < 0.05);
    }

    #[test]
    fn table_rows_match_reference_exponents() {
        let rows = complexity_table().unwrap();
        assert_eq!(rows.len(), 15);
        for r in rows.iter().filter(|r| !r.rs_row) {
            assert!((r.di_log2 - f64::from(r.ref_di_exp)).abs() <= 1.0, "{r:?}");
            let ds = r.ds.as_ref().unwrap();
            let fold = BigUint::from(r.t1 - r.t2).pow(4);
            assert!(ds * fold <= r.di, "{r:?}");
        }
    }

    proptest! {
        #[test]
        fn residue_matches_big_integer(v in 0u64..(1 << 20), k in 1usize..5, a in 2u64..5000) {
            let x = BitSequence::from_value(v, 20).unwrap();
            let big = h_syndrome(&x, k).unwrap() % BigUint::from(a);
            prop_assert_eq!(big.to_u64().unwrap(), h_residue(&x, k, a));
        }

        #[test]
        fn pack_is_injective(a in 1u64..1000, r in 0u64..1000) {
            prop_assume!(r < a);
            let c = CompressedSyndrome::pack(a, r, 10).unwrap();
            prop_assert_eq!(CompressedSyndrome::unpack(c.enc, 10).unwrap(), c);
        }
    }
}
