//! Locate-then-correct codes for two bursts of `(t1,t2)`-DI with `t1 > t2`.
//!
//! Folding `x` into `delta = t1 - t2` rows turns each burst into one
//! `(1, t'-1)` DS burst on the first row `X[1]`. The first row is kept
//! d-regular and protected by a row syndrome, which pins the bursts down to
//! short intervals of `x`. Window checksums then supply the syndromes of the
//! few windows that can contain the bursts.
//!
//! Side information of a word:
//!
//! * `f_row`: two-burst DS syndrome of `X[1]`;
//! * `phi[a][i] = sum_{j = a mod 3} j^i f1(x_{L_j}) mod 2 n^i N1` over windows
//!   of half-width `rho1`;
//! * `h_par[i] = sum_{j = i mod 2} f2(x_{L_j}) mod N2` over the same windows;
//! * `g_par[i]`, the same sum over windows of half-width `rho2`, mod `N3`.
//!
//! The decoder tries every applicable correction path and accepts a result
//! only after re-deriving the side information and the channel relation.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelSpec, Model, Shape, Variant};
use crate::codebook::{Codebook, CodebookHeader};
use crate::error::{invalid, Error, Result};
use crate::seqcore::{fold, from_rows, is_d_regular, mask, BitSequence, Interval};
use crate::syncomp::{self, CompressedSyndrome, SyndromeMeta, SyndromeTable};

pub use crate::syncomp::t_prime;

/// Parameters of the construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralParams {
    pub n: usize,
    pub t1: usize,
    pub t2: usize,
    /// Regularity constant of the first row.
    pub d: f64,
    pub rho1: usize,
    pub rho2: usize,
}

impl GeneralParams {
    pub fn new(n: usize, t1: usize, t2: usize, d: f64, rho1: usize, rho2: usize) -> Result<Self> {
        t_prime(t1, t2)?;
        let delta = t1 - t2;
        if !n.is_multiple_of(delta) {
            return Err(invalid(format!("t1 - t2 = {delta} must divide n = {n}")));
        }
        if n > 62 || n < 2 * t1 + 2 {
            return Err(invalid(format!("n = {n} is outside the supported range")));
        }
        if d.is_nan() || d <= 0.0 {
            return Err(invalid("d must be positive"));
        }
        if rho1 < t1 || rho2 < t1 {
            return Err(invalid(format!("window steps must be at least t1 = {t1}")));
        }
        Ok(GeneralParams {
            n,
            t1,
            t2,
            d,
            rho1,
            rho2,
        })
    }

    /// Small windows for exhaustive experiments: `rho1 = 2 delta`,
    /// `rho2 = 3 delta` (at least `t1`).
    pub fn desk(n: usize, t1: usize, t2: usize, d: f64) -> Result<Self> {
        let delta = t1.saturating_sub(t2).max(1);
        Self::new(n, t1, t2, d, (2 * delta).max(t1), (3 * delta).max(t1))
    }

    /// Window steps from the interval-length bounds.
    pub fn from_bounds(n: usize, t1: usize, t2: usize, d: f64) -> Result<Self> {
        let tp = t_prime(t1, t2)?;
        let delta = (t1 - t2) as f64;
        let lg = (n as f64 / delta).log2();
        let rho1 = ((d * lg + 2.0 * tp as f64 + 1.0) * delta).ceil() as usize;
        let rho2 = ((3.0 * d * lg + 4.0 * tp as f64 + 1.0) * delta).ceil() as usize;
        Self::new(n, t1, t2, d, rho1, rho2)
    }

    pub fn delta(&self) -> usize {
        self.t1 - self.t2
    }

    pub fn t_prime(&self) -> usize {
        self.t1.div_ceil(self.delta())
    }

    /// Length of `X[1]`.
    pub fn row_len(&self) -> usize {
        self.n / self.delta()
    }

    fn log_term(&self) -> f64 {
        self.d * (self.row_len() as f64).log2()
    }

    /// Length bound on each of two separated burst intervals.
    pub fn separate_bound(&self) -> f64 {
        (self.log_term() + 2.0 * self.t_prime() as f64 + 1.0) * self.delta() as f64
    }

    /// Length bound on a joint burst interval.
    pub fn joint_bound(&self) -> f64 {
        (3.0 * self.log_term() + 4.0 * self.t_prime() as f64 + 1.0) * self.delta() as f64
    }

    pub fn channel(&self) -> ChannelSpec {
        ChannelSpec::di(2, self.t1, self.t2)
    }

    pub fn scheme1(&self) -> WindowScheme {
        windows(self.n, self.rho1)
    }

    pub fn scheme2(&self) -> WindowScheme {
        windows(self.n, self.rho2)
    }
}

/// Overlapping windows `L_j = [(j-1) rho + 1, (j+1) rho]`, the last one
/// ending at `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowScheme {
    pub rho: usize,
    pub windows: Vec<Interval>,
}

impl WindowScheme {
    pub fn count(&self) -> usize {
        self.windows.len()
    }

    /// 1-based window index.
    pub fn window(&self, j: usize) -> Interval {
        self.windows[j - 1]
    }

    /// Indices of the windows that contain `iv`.
    pub fn containing(&self, iv: Interval) -> Vec<usize> {
        (1..=self.count())
            .filter(|&j| self.window(j).contains_interval(&iv))
            .collect()
    }
}

/// The window scheme of step `rho` on `[1, n]`; a single window when
/// `rho >= n` or when only one window fits.
pub fn windows(n: usize, rho: usize) -> WindowScheme {
    let rho = rho.max(1);
    let count = n.div_ceil(rho).saturating_sub(1);
    if rho >= n || count <= 1 {
        return WindowScheme {
            rho,
            windows: vec![Interval::new(1, n)],
        };
    }
    let windows = (1..=count)
        .map(|j| {
            let end = if j == count { n } else { (j + 1) * rho };
            Interval::new((j - 1) * rho + 1, end)
        })
        .collect();
    WindowScheme { rho, windows }
}

/// `X[1]`: the symbols at positions `1, delta + 1, 2 delta + 1, ...`.
pub fn first_row(x: &BitSequence, delta: usize) -> Result<BitSequence> {
    Ok(fold(x, delta)?.row(1))
}

// `X[1]` by direct bit extraction, for `delta | len`.
#[inline]
fn row_bits(v: u64, len: usize, delta: usize) -> u64 {
    let cols = len / delta;
    let mut r = 0u64;
    for c in 0..cols {
        r = (r << 1) | ((v >> (len - 1 - c * delta)) & 1);
    }
    r
}

/// Effect of one burst on the first row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowObservation {
    /// `ceil(i / delta)`.
    pub b: usize,
    /// First column (1-based) where the rows disagree read left to right.
    pub first_changed: usize,
    /// Last column of `X[1]` that disagrees when the tails are aligned.
    pub last_changed: usize,
    /// Whether the corrupted row equals `X[1]` outside columns
    /// `[b, b + t')`, with one column removed.
    pub contained: bool,
    /// Whether the row change is one `(1, t'-1)` DS burst starting at `b`
    /// (aligned `i`) or in `[b + 1, b + t')` (unaligned `i`).
    pub start_in_range: bool,
}

// Whether `yv` (m - 1 bits) is `xv` (m bits) hit by one free DS burst at
// 1-based column `c` that substitutes up to `w` symbols.
#[inline]
fn ds_at(xv: u64, yv: u64, m: usize, c: usize, w: usize) -> bool {
    let w = w.min(m - c);
    let head = c - 1;
    let head_ok = head == 0 || (xv >> (m - head)) == (yv >> (m - 1 - head));
    let tail = m - c - w;
    head_ok && (tail == 0 || (xv & mask(tail)) == (yv & mask(tail)))
}

fn observe(xv: u64, yv: u64, m: usize, i: usize, delta: usize, tp: usize) -> RowObservation {
    let b = i.div_ceil(delta);
    // xv has m bits, yv has m - 1
    let mut first = m;
    for k in 0..m - 1 {
        if (xv >> (m - 1 - k)) & 1 != (yv >> (m - 2 - k)) & 1 {
            first = k;
            break;
        }
    }
    let mut last = 0;
    for k in (1..m).rev() {
        if (xv >> (m - 1 - k)) & 1 != (yv >> (m - 1 - k)) & 1 {
            last = k;
            break;
        }
    }
    let starts = if (i - 1).is_multiple_of(delta) { b..b + 1 } else { b + 1..b + tp };
    RowObservation {
        b,
        first_changed: first + 1,
        last_changed: last + 1,
        contained: ds_at(xv, yv, m, b, tp - 1),
        start_in_range: starts.clone().filter(|&c| c <= m).any(|c| ds_at(xv, yv, m, c, tp - 1)),
    }
}

/// Applies one `(t1,t2)`-DI burst with block `block` at position `i` and
/// reports its footprint on `X[1]`.
pub fn observe_row_burst(
    x: &BitSequence,
    i: usize,
    block: &BitSequence,
    t1: usize,
    t2: usize,
) -> Result<RowObservation> {
    let tp = t_prime(t1, t2)?;
    let delta = t1 - t2;
    if !x.len().is_multiple_of(delta) || block.len() != t2 {
        return Err(invalid("need delta | n and a block of length t2"));
    }
    let p = channel::BurstPattern::di(vec![channel::Burst::new(i, t1, *block)]);
    let y = channel::apply(x, &p)?;
    let m = x.len() / delta;
    Ok(observe(
        row_bits(x.value(), x.len(), delta),
        row_bits(y.value(), y.len(), delta),
        m,
        i,
        delta,
        tp,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowSweepReport {
    pub n: usize,
    pub t1: usize,
    pub t2: usize,
    pub bursts: u64,
    /// Bursts whose row change leaves columns `[b, b + t')`.
    pub violations: u64,
    /// `(x, i, block)` of the first such burst.
    pub first_violation: Option<(BitSequence, usize, BitSequence)>,
    /// Bursts whose row change is not a DS burst at an allowed start.
    pub start_violations: u64,
}

impl RowSweepReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks every legal single burst on every word of length `n`.
pub fn row_burst_sweep(n: usize, t1: usize, t2: usize) -> Result<RowSweepReport> {
    let tp = t_prime(t1, t2)?;
    let delta = t1 - t2;
    if !n.is_multiple_of(delta) || n < t1 || n >= 40 {
        return Err(invalid(format!("unsupported sweep length {n}")));
    }
    let m = n / delta;
    let out_len = n - delta;
    let empty = RowSweepReport {
        n,
        t1,
        t2,
        bursts: 0,
        violations: 0,
        first_violation: None,
        start_violations: 0,
    };
    // (bursts, start violations, violations, first violating (v, i, block))
    type Tally = (u64, u64, u64, Option<(u64, usize, u64)>);
    let merge = |a: Tally, b: Tally| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3.or(b.3));
    let chunk = 1u64 << n.min(12);
    let tally = (0..(1u64 << n) / chunk)
        .into_par_iter()
        .map(|c| {
            let mut t: Tally = (0, 0, 0, None);
            for v in c * chunk..(c + 1) * chunk {
                let xr = row_bits(v, n, delta);
                for i in 1..=n + 1 - t1 {
                    let tail_len = n - (i - 1) - t1;
                    let prefix = v >> (n - (i - 1));
                    let suffix = v & mask(tail_len);
                    let first = (v >> (n - i)) & 1;
                    let last = (v >> (n - (i + t1 - 1))) & 1;
                    for block in 0..(1u64 << t2) {
                        // strict legality of the inserted block
                        if (block >> (t2 - 1)) & 1 == first || block & 1 == last {
                            continue;
                        }
                        let y = (((prefix << t2) | block) << tail_len) | suffix;
                        let obs = observe(xr, row_bits(y, out_len, delta), m, i, delta, tp);
                        t.0 += 1;
                        t.1 += u64::from(!obs.start_in_range);
                        if !obs.contained {
                            t.2 += 1;
                            t.3.get_or_insert((v, i, block));
                        }
                    }
                }
            }
            t
        })
        .reduce(|| (0, 0, 0, None), merge);
    let first_violation = match tally.3 {
        Some((v, i, block)) => Some((
            BitSequence::from_value(v, n)?,
            i,
            BitSequence::from_value(block, t2)?,
        )),
        None => None,
    };
    let report = RowSweepReport {
        bursts: tally.0,
        start_violations: tally.1,
        violations: tally.2,
        first_violation,
        ..empty
    };
    Ok(report)
}

/// Where the bursts can lie, in coordinates of `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum LocationReport {
    TwoSeparate { j1: Interval, j2: Interval },
    OneJoint { j: Interval },
}

impl LocationReport {
    pub fn hull(&self) -> Interval {
        match *self {
            LocationReport::TwoSeparate { j1, j2 } => Interval::new(j1.start, j2.end),
            LocationReport::OneJoint { j } => j,
        }
    }

    pub fn within_bounds(&self, p: &GeneralParams) -> bool {
        match self {
            LocationReport::TwoSeparate { j1, j2 } => {
                j1.len() as f64 <= p.separate_bound() && j2.len() as f64 <= p.separate_bound()
            }
            LocationReport::OneJoint { j } => j.len() as f64 <= p.joint_bound(),
        }
    }

    /// Whether the intervals cover every deleted span `[i, i + t1 - 1]`.
    pub fn covers(&self, positions: &[usize], t1: usize) -> bool {
        positions.iter().all(|&i| {
            let span = Interval::new(i, i + t1 - 1);
            match self {
                LocationReport::TwoSeparate { j1, j2 } => {
                    j1.contains_interval(&span) || j2.contains_interval(&span)
                }
                LocationReport::OneJoint { j } => j.contains_interval(&span),
            }
        })
    }
}

/// Output of the locator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Location {
    /// The recovered first row.
    pub row: BitSequence,
    pub report: LocationReport,
    /// Every pair of row columns whose DS bursts explain the corrupted row.
    pub pairs: Vec<(usize, usize)>,
}

impl Location {
    /// Burst positions of `x` that show up at row column `c`: the aligned
    /// `(c-1) delta + 1`, or an unaligned `i` with `ceil(i / delta)` in
    /// `[c - t' + 1, c - 1]`.
    pub fn starts(c: usize, params: &GeneralParams) -> Vec<usize> {
        let delta = params.delta();
        let last = params.n + 1 - params.t1;
        let mut out = Vec::new();
        for b in (c + 1).saturating_sub(params.t_prime()).max(1)..c {
            out.extend(((b - 1) * delta + 2..=b * delta).filter(|&i| i <= last));
        }
        let aligned = (c - 1) * delta + 1;
        if aligned <= last {
            out.push(aligned);
        }
        out
    }

    /// Interval of `x` that a burst seen at row column `c` can touch.
    pub fn span(c: usize, params: &GeneralParams) -> Interval {
        let starts = Self::starts(c, params);
        let lo = starts.first().copied().unwrap_or(1);
        let hi = starts.last().copied().unwrap_or(lo);
        Interval::new(lo, (hi + params.t1 - 1).min(params.n))
    }
}

/// Recovers `X[1]` from its corrupted copy and locates the bursts.
pub fn locate(
    corrupt_row: &BitSequence,
    f_row: &CompressedSyndrome,
    params: &GeneralParams,
) -> Result<Location> {
    let tp = params.t_prime();
    let m = params.row_len();
    let row = syncomp::table(m, syncomp::row_spec(tp))?.invert(corrupt_row, f_row)?;
    let shape = Shape::new(1, tp - 1);
    let mut pairs = Vec::new();
    channel::for_each_output(&row, &[shape, shape], Model::Ds, Variant::Free, |y, pos| {
        if y == *corrupt_row {
            pairs.push((pos[0], pos[1]));
        }
    });
    pairs.sort_unstable();
    pairs.dedup();
    if pairs.is_empty() {
        return Err(Error::Undecodable("no burst explains the first row".into()));
    }
    let hull = |f: fn(&(usize, usize)) -> usize| {
        let lo = pairs.iter().map(f).min().unwrap_or(1);
        let hi = pairs.iter().map(f).max().unwrap_or(1);
        Interval::new(Location::span(lo, params).start, Location::span(hi, params).end)
    };
    let (j1, j2) = (hull(|p| p.0), hull(|p| p.1));
    let report = if j1.end < j2.start {
        LocationReport::TwoSeparate { j1, j2 }
    } else {
        LocationReport::OneJoint {
            j: Interval::new(j1.start.min(j2.start), j1.end.max(j2.end)),
        }
    };
    Ok(Location { row, report, pairs })
}

fn window_tables(
    scheme: &WindowScheme,
    spec: ChannelSpec,
) -> Result<BTreeMap<usize, std::sync::Arc<SyndromeTable>>> {
    let mut out = BTreeMap::new();
    for w in &scheme.windows {
        if let std::collections::btree_map::Entry::Vacant(e) = out.entry(w.len()) {
            e.insert(syncomp::table(w.len(), spec)?);
        }
    }
    Ok(out)
}

fn modulus(tables: &BTreeMap<usize, std::sync::Arc<SyndromeTable>>) -> u128 {
    tables
        .values()
        .map(|t| t.enc_bound())
        .max()
        .unwrap_or(1)
        .next_power_of_two()
}

fn content(x: &BitSequence, w: Interval) -> BitSequence {
    x.slice(w.start - 1, w.end)
}

fn window_encs(x: &BitSequence, scheme: &WindowScheme, spec: ChannelSpec) -> Result<Vec<u128>> {
    scheme
        .windows
        .iter()
        .map(|w| Ok(syncomp::table(w.len(), spec)?.get(&content(x, *w))?.enc))
        .collect()
}

// Weighted class sums over packed window syndromes (1-based window index).
fn class_sum(encs: &[u128], classes: usize, class: usize, weight: u32, modulus: u128) -> u128 {
    encs.iter()
        .enumerate()
        .filter(|(k, _)| (k + 1) % classes == class)
        .fold(0u128, |acc, (k, &e)| {
            (acc + ((k + 1) as u128).pow(weight) * e) % modulus
        })
}

/// `phi^(a)_i(x)` with modulus `2 n^i N1`.
pub fn phi(x: &BitSequence, a: usize, i: u32, params: &GeneralParams, n1: u128) -> Result<u128> {
    let t = (params.t1, params.t2);
    let encs = window_encs(x, &params.scheme1(), syncomp::one_burst_spec(t.0, t.1))?;
    Ok(class_sum(&encs, 3, a, i, phi_modulus(params.n, i, n1)))
}

fn phi_modulus(n: usize, i: u32, n1: u128) -> u128 {
    2 * (n as u128).pow(i) * n1
}

/// `h^(i)(x)`: parity-class sum of two-burst window syndromes, mod `N2`.
pub fn h_par(x: &BitSequence, i: usize, params: &GeneralParams, n2: u128) -> Result<u128> {
    let encs = window_encs(x, &params.scheme1(), syncomp::two_burst_spec(params.t1, params.t2))?;
    Ok(class_sum(&encs, 2, i, 0, n2))
}

/// `g^(i)(x)`: as [`h_par`] over the wider windows, mod `N3`.
pub fn g_par(x: &BitSequence, i: usize, params: &GeneralParams, n3: u128) -> Result<u128> {
    let encs = window_encs(x, &params.scheme2(), syncomp::two_burst_spec(params.t1, params.t2))?;
    Ok(class_sum(&encs, 2, i, 0, n3))
}

/// The checksums a codeword must match.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SideValues {
    pub f_row: u128,
    pub phi: [[u128; 2]; 3],
    pub h_par: [u128; 2],
    pub g_par: [u128; 2],
}

/// Side information with its parameters and moduli.
#[derive(Clone, Debug, PartialEq)]
pub struct SideInfo {
    pub params: GeneralParams,
    pub values: SideValues,
    pub n1: u128,
    pub n2: u128,
    pub n3: u128,
    /// Syndrome table parameters, row table first.
    pub syndromes: Vec<SyndromeMeta>,
}

// Everything the encoder and decoder share for one parameter set.
struct Context {
    params: GeneralParams,
    row: std::sync::Arc<SyndromeTable>,
    s1: WindowScheme,
    s2: WindowScheme,
    f1: BTreeMap<usize, std::sync::Arc<SyndromeTable>>,
    f2a: BTreeMap<usize, std::sync::Arc<SyndromeTable>>,
    f2b: BTreeMap<usize, std::sync::Arc<SyndromeTable>>,
    n1: u128,
    n2: u128,
    n3: u128,
}

impl Context {
    fn new(params: &GeneralParams) -> Result<Self> {
        let (t1, t2) = (params.t1, params.t2);
        let s1 = params.scheme1();
        let s2 = params.scheme2();
        let row = syncomp::table(params.row_len(), syncomp::row_spec(params.t_prime()))?;
        let f1 = window_tables(&s1, syncomp::one_burst_spec(t1, t2))?;
        let f2a = window_tables(&s1, syncomp::two_burst_spec(t1, t2))?;
        let f2b = window_tables(&s2, syncomp::two_burst_spec(t1, t2))?;
        Ok(Context {
            params: params.clone(),
            n1: modulus(&f1),
            n2: modulus(&f2a),
            n3: modulus(&f2b),
            row,
            s1,
            s2,
            f1,
            f2a,
            f2b,
        })
    }

    fn encs(
        tables: &BTreeMap<usize, std::sync::Arc<SyndromeTable>>,
        scheme: &WindowScheme,
        x: &BitSequence,
    ) -> Result<Vec<u128>> {
        scheme
            .windows
            .iter()
            .map(|w| Ok(tables[&w.len()].get(&content(x, *w))?.enc))
            .collect()
    }

    fn values(&self, x: &BitSequence) -> Result<SideValues> {
        let p = &self.params;
        let row = first_row(x, p.delta())?;
        let e1 = Self::encs(&self.f1, &self.s1, x)?;
        let e2 = Self::encs(&self.f2a, &self.s1, x)?;
        let e3 = Self::encs(&self.f2b, &self.s2, x)?;
        let mut phi = [[0u128; 2]; 3];
        for (a, row_a) in phi.iter_mut().enumerate() {
            for i in 0..2u32 {
                row_a[i as usize] = class_sum(&e1, 3, a, i, phi_modulus(p.n, i, self.n1));
            }
        }
        Ok(SideValues {
            f_row: self.row.get(&row)?.enc,
            phi,
            h_par: [class_sum(&e2, 2, 0, 0, self.n2), class_sum(&e2, 2, 1, 0, self.n2)],
            g_par: [class_sum(&e3, 2, 0, 0, self.n3), class_sum(&e3, 2, 1, 0, self.n3)],
        })
    }

    fn side(&self, values: SideValues) -> SideInfo {
        let mut syndromes = vec![self.row.meta().clone()];
        for t in self.f1.values().chain(self.f2a.values()).chain(self.f2b.values()) {
            if !syndromes.contains(t.meta()) {
                syndromes.push(t.meta().clone());
            }
        }
        SideInfo {
            params: self.params.clone(),
            values,
            n1: self.n1,
            n2: self.n2,
            n3: self.n3,
            syndromes,
        }
    }
}

/// `psi(x)`: the full side information of `x`.
pub fn psi(x: &BitSequence, params: &GeneralParams) -> Result<SideInfo> {
    if x.len() != params.n {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: params.n,
        });
    }
    let ctx = Context::new(params)?;
    Ok(ctx.side(ctx.values(x)?))
}

fn dec(v: u128) -> serde_json::Value {
    serde_json::Value::String(v.to_string())
}

fn parse_dec(v: &serde_json::Value, what: &str) -> Result<u128> {
    v.as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("{what} must be a decimal string")))
}

impl SideInfo {
    /// JSON with every checksum and modulus as a decimal string.
    pub fn to_json(&self) -> serde_json::Value {
        let v = &self.values;
        serde_json::json!({
            "params": self.params,
            "t_prime": self.params.t_prime().to_string(),
            "f_row": dec(v.f_row),
            "phi": v.phi.iter().map(|r| r.iter().map(|&e| dec(e)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "h_par": v.h_par.iter().map(|&e| dec(e)).collect::<Vec<_>>(),
            "g_par": v.g_par.iter().map(|&e| dec(e)).collect::<Vec<_>>(),
            "n1": dec(self.n1),
            "n2": dec(self.n2),
            "n3": dec(self.n3),
            "syndromes": self.syndromes,
        })
    }

    pub fn from_json(j: &serde_json::Value) -> Result<Self> {
        let fmt = |e: serde_json::Error| Error::Format(e.to_string());
        let params: GeneralParams = serde_json::from_value(j["params"].clone()).map_err(fmt)?;
        let pair = |v: &serde_json::Value, what: &str| -> Result<[u128; 2]> {
            Ok([parse_dec(&v[0], what)?, parse_dec(&v[1], what)?])
        };
        let mut phi = [[0u128; 2]; 3];
        for (a, row) in phi.iter_mut().enumerate() {
            *row = pair(&j["phi"][a], "phi")?;
        }
        Ok(SideInfo {
            params,
            values: SideValues {
                f_row: parse_dec(&j["f_row"], "f_row")?,
                phi,
                h_par: pair(&j["h_par"], "h_par")?,
                g_par: pair(&j["g_par"], "g_par")?,
            },
            n1: parse_dec(&j["n1"], "n1")?,
            n2: parse_dec(&j["n2"], "n2")?,
            n3: parse_dec(&j["n3"], "n3")?,
            syndromes: serde_json::from_value(j["syndromes"].clone()).map_err(fmt)?,
        })
    }
}

/// A built code: its side information and members.
#[derive(Clone, Debug)]
pub struct GeneralCode {
    pub side: SideInfo,
    pub codebook: Codebook,
}

fn log2_ceil(v: u128) -> usize {
    (128 - v.saturating_sub(1).leading_zeros()) as usize
}

/// Sieves `{x : X[1] d-regular, psi(x) = target}`. Without a target the
/// row syndrome is fixed first to its most common value among regular rows,
/// then the remaining checksums to their most common joint value.
pub fn encode_general(params: &GeneralParams, target: Option<&SideInfo>) -> Result<GeneralCode> {
    let ctx = Context::new(params)?;
    if let Some(t) = target {
        if t.params != *params {
            return Err(invalid("target side information has other parameters"));
        }
    }
    let m = params.row_len();
    let delta = params.delta();
    let mut by_row: BTreeMap<u128, Vec<BitSequence>> = BTreeMap::new();
    for r in BitSequence::all(m).filter(|r| is_d_regular(r, params.d)) {
        by_row.entry(ctx.row.get(&r)?.enc).or_default().push(r);
    }
    let rows = match target {
        Some(t) => by_row.remove(&t.values.f_row).unwrap_or_default(),
        None => by_row
            .into_iter()
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
            .map(|(_, v)| v)
            .unwrap_or_default(),
    };
    let rest = params.n - m;
    crate::check_budget("general sieve", rest + log2_ceil(rows.len() as u128))?;
    let mut buckets: HashMap<SideValues, Vec<BitSequence>> = HashMap::new();
    let mut members = Vec::new();
    for r in &rows {
        for v in 0..(1u64 << rest) {
            let mut parts = vec![*r];
            for k in 0..delta - 1 {
                parts.push(BitSequence::from_value((v >> (k * m)) & mask(m), m)?);
            }
            let x = *from_rows(&parts)?.source();
            let vals = ctx.values(&x)?;
            match target {
                Some(t) if vals == t.values => members.push(x),
                Some(_) => {}
                None => buckets.entry(vals).or_default().push(x),
            }
        }
    }
    let values = match target {
        Some(t) => t.values.clone(),
        None => {
            let best = buckets
                .into_iter()
                .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.1[0].cmp(&a.1[0])))
                .ok_or_else(|| Error::Undecodable("no regular first row exists".into()))?;
            members = best.1;
            best.0
        }
    };
    let side = ctx.side(values);
    let mut params_json = BTreeMap::new();
    params_json.insert("side".to_string(), side.to_json());
    let header = CodebookHeader {
        construction: "general".into(),
        n: params.n,
        t1: params.t1,
        t2: params.t2,
        params: params_json,
    };
    Ok(GeneralCode {
        codebook: Codebook::new(header, members)?,
        side,
    })
}

/// Which correction path produced a decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DecodePath {
    /// The word was not corrupted.
    Clean,
    /// Two windows, syndromes from the `phi` sums.
    SeparateWindows,
    /// One narrow window holding both bursts, syndrome from `h`.
    SharedWindow,
    /// One wide window holding both bursts, syndrome from `g`.
    WideWindow,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecodeReport {
    pub word: BitSequence,
    pub row: BitSequence,
    pub location: Option<LocationReport>,
    /// Every path that reached the decoded word.
    pub paths: Vec<DecodePath>,
}

// Image of window `w` in the received word, given burst regions with the
// number of bursts each holds. `None` if a region straddles the window.
fn image(xp: &BitSequence, w: Interval, regions: &[(Interval, usize)], delta: usize) -> Option<(BitSequence, usize)> {
    let mut shift = 0;
    let mut inside = 0;
    for (r, k) in regions {
        if r.end < w.start {
            shift += k * delta;
        } else if w.contains_interval(r) {
            inside += k;
        } else if r.intersects(&w) {
            return None;
        }
    }
    let start = (w.start - 1).checked_sub(shift)?;
    let end = w.end.checked_sub(shift + inside * delta)?;
    if start > end || end > xp.len() {
        return None;
    }
    Some((xp.slice(start, end), inside))
}

// Recovers the unknown packed syndromes of one residue class from its
// `i = 0` and `i = 1` sums.
fn solve_class(
    known: &[Option<u128>],
    class: usize,
    s: [u128; 2],
    n: usize,
    n1: u128,
) -> Option<Vec<(usize, u128)>> {
    let mut unknown = Vec::new();
    let mut sums = [0u128; 2];
    for (k, v) in known.iter().enumerate() {
        let j = k + 1;
        if j % 3 != class {
            continue;
        }
        match v {
            Some(e) => {
                sums[0] += e;
                sums[1] += j as u128 * e;
            }
            None => unknown.push(j),
        }
    }
    let m0 = phi_modulus(n, 0, n1);
    let m1 = phi_modulus(n, 1, n1);
    let r0 = (s[0] + m0 - sums[0] % m0) % m0;
    let r1 = (s[1] + m1 - sums[1] % m1) % m1;
    match unknown[..] {
        [] => (r0 == 0).then(Vec::new),
        [j] => (r0 < n1 && r1 == (j as u128 * r0) % m1).then(|| vec![(j, r0)]),
        [ja, jb] => {
            // r0 = u + v, r1 = ja u + jb v exactly
            let num = r1 as i128 - ja as i128 * r0 as i128;
            let den = (jb - ja) as i128;
            if num % den != 0 {
                return None;
            }
            let v = num / den;
            let u = r0 as i128 - v;
            if v < 0 || u < 0 || v >= n1 as i128 || u >= n1 as i128 {
                return None;
            }
            Some(vec![(ja, u as u128), (jb, v as u128)])
        }
        _ => None,
    }
}

fn splice(xp: &BitSequence, w: Interval, fixed: &BitSequence, removed: usize) -> BitSequence {
    xp.slice(0, w.start - 1)
        .concat(fixed)
        .concat(&xp.slice(w.end - removed, xp.len()))
}

fn invert_packed(table: &SyndromeTable, corrupted: &BitSequence, enc: u128) -> Option<BitSequence> {
    let f = CompressedSyndrome::unpack(enc, table.meta().width).ok()?;
    table.invert(corrupted, &f).ok()
}

impl Context {
    fn separate_path(&self, xp: &BitSequence, j1: Interval, j2: Interval, side: &SideValues) -> Vec<BitSequence> {
        let p = &self.params;
        let delta = p.delta();
        let regions = [(j1, 1), (j2, 1)];
        let known: Vec<Option<u128>> = self
            .s1
            .windows
            .iter()
            .map(|w| match image(xp, *w, &regions, delta) {
                Some((c, 0)) => self.f1[&w.len()].get(&c).ok().map(|f| f.enc),
                _ => None,
            })
            .collect();
        let mut solved: [Option<Vec<(usize, u128)>>; 3] = Default::default();
        for (a, slot) in solved.iter_mut().enumerate() {
            *slot = solve_class(&known, a, side.phi[a], p.n, self.n1);
        }
        let lookup = |j: usize| -> Option<u128> {
            solved[j % 3].as_ref()?.iter().find(|(k, _)| *k == j).map(|(_, e)| *e)
        };
        let mut out = Vec::new();
        for &a in &self.s1.containing(j1) {
            let wa = self.s1.window(a);
            if wa.intersects(&j2) {
                continue;
            }
            let Some((img, 1)) = image(xp, wa, &regions, delta) else { continue };
            let Some(ea) = lookup(a) else { continue };
            let Some(fixed) = invert_packed(&self.f1[&wa.len()], &img, ea) else { continue };
            let z = splice(xp, wa, &fixed, delta);
            for &b in &self.s1.containing(j2) {
                let wb = self.s1.window(b);
                let Some(eb) = lookup(b) else { continue };
                if wb.end - delta > z.len() {
                    continue;
                }
                let img_b = z.slice(wb.start - 1, wb.end - delta);
                if let Some(fixed_b) = invert_packed(&self.f1[&wb.len()], &img_b, eb) {
                    out.push(splice(&z, wb, &fixed_b, delta));
                }
            }
        }
        out
    }

    fn shared_path(
        &self,
        xp: &BitSequence,
        hull: Interval,
        scheme: &WindowScheme,
        tables: &BTreeMap<usize, std::sync::Arc<SyndromeTable>>,
        sums: [u128; 2],
        modulus: u128,
    ) -> Vec<BitSequence> {
        let delta = self.params.delta();
        let regions = [(hull, 2)];
        let mut out = Vec::new();
        for &j in &scheme.containing(hull) {
            let class = j % 2;
            let mut acc = 0u128;
            let mut ok = true;
            for (k, w) in scheme.windows.iter().enumerate() {
                if (k + 1) % 2 != class || k + 1 == j {
                    continue;
                }
                match image(xp, *w, &regions, delta) {
                    Some((c, 0)) => match tables[&w.len()].get(&c) {
                        Ok(f) => acc = (acc + f.enc) % modulus,
                        Err(_) => ok = false,
                    },
                    _ => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let enc = (sums[class] + modulus - acc) % modulus;
            let w = scheme.window(j);
            let Some((img, 2)) = image(xp, w, &regions, delta) else { continue };
            if let Some(fixed) = invert_packed(&tables[&w.len()], &img, enc) {
                out.push(splice(xp, w, &fixed, 2 * delta));
            }
        }
        out
    }

    fn decode(&self, xp: &BitSequence, side: &SideValues) -> Result<DecodeReport> {
        let p = &self.params;
        let delta = p.delta();
        let spec = p.channel();
        if xp.len() == p.n {
            // no burst: accepted only if it is itself a codeword
            if self.values(xp)? == *side {
                return Ok(DecodeReport {
                    word: *xp,
                    row: first_row(xp, delta)?,
                    location: None,
                    paths: vec![DecodePath::Clean],
                });
            }
            return Err(Error::Undecodable("uncorrupted word has other side information".into()));
        }
        if spec.output_len(p.n) != Some(xp.len()) {
            return Err(Error::LengthMismatch {
                left: xp.len(),
                right: spec.output_len(p.n).unwrap_or(0),
            });
        }
        let row_f = CompressedSyndrome::unpack(side.f_row, self.row.meta().width)?;
        let corrupt_row = first_row(xp, delta)?;
        let location = locate(&corrupt_row, &row_f, p)?;
        let row = location.row;
        let mut found: BTreeMap<BitSequence, Vec<DecodePath>> = BTreeMap::new();
        let mut consider = |cands: Vec<BitSequence>, path: DecodePath| -> Result<()> {
            for c in cands {
                if first_row(&c, delta)? != row || self.values(&c)? != *side {
                    continue;
                }
                if channel::ball(&c, &spec)?.binary_search(xp).is_ok() {
                    let paths = found.entry(c).or_default();
                    if !paths.contains(&path) {
                        paths.push(path);
                        paths.sort_unstable();
                    }
                }
            }
            Ok(())
        };
        // burst regions: exact spans for every start pair the row explanations
        // allow, then the located intervals themselves
        let t1 = p.t1;
        let mut hypotheses: Vec<(Interval, Interval)> = Vec::new();
        for &(c1, c2) in &location.pairs {
            for i1 in Location::starts(c1, p) {
                for i2 in Location::starts(c2, p).into_iter().filter(|&i2| i2 >= i1 + t1) {
                    hypotheses.push((
                        Interval::new(i1, i1 + t1 - 1),
                        Interval::new(i2, i2 + t1 - 1),
                    ));
                }
            }
        }
        hypotheses.push(match location.report {
            LocationReport::TwoSeparate { j1, j2 } => (j1, j2),
            LocationReport::OneJoint { j } => (j, j),
        });
        hypotheses.sort_unstable_by_key(|(a, b)| (a.start, a.end, b.start, b.end));
        hypotheses.dedup();
        let mut hulls = Vec::new();
        for &(r1, r2) in &hypotheses {
            if r1.end < r2.start {
                consider(self.separate_path(xp, r1, r2, side), DecodePath::SeparateWindows)?;
            }
            let hull = Interval::new(r1.start.min(r2.start), r1.end.max(r2.end));
            if !hulls.contains(&hull) {
                hulls.push(hull);
            }
        }
        for hull in hulls {
            consider(
                self.shared_path(xp, hull, &self.s1, &self.f2a, side.h_par, self.n2),
                DecodePath::SharedWindow,
            )?;
            consider(
                self.shared_path(xp, hull, &self.s2, &self.f2b, side.g_par, self.n3),
                DecodePath::WideWindow,
            )?;
        }
        let location = location.report;
        match found.len() {
            0 => Err(Error::Undecodable(format!(
                "no correction path succeeded ({location:?})"
            ))),
            1 => {
                let (word, paths) = found.into_iter().next().expect("one entry");
                Ok(DecodeReport {
                    word,
                    row,
                    location: Some(location),
                    paths,
                })
            }
            k => Err(Error::ConstructionViolation(k)),
        }
    }
}

/// A reusable decoder for one parameter set.
pub struct GeneralDecoder {
    ctx: Context,
    side: SideInfo,
}

impl GeneralDecoder {
    pub fn new(side: &SideInfo) -> Result<Self> {
        let ctx = Context::new(&side.params)?;
        if (ctx.n1, ctx.n2, ctx.n3) != (side.n1, side.n2, side.n3) {
            return Err(Error::Format("moduli disagree with the parameters".into()));
        }
        Ok(GeneralDecoder {
            ctx,
            side: side.clone(),
        })
    }

    pub fn side(&self) -> &SideInfo {
        &self.side
    }

    pub fn values(&self, x: &BitSequence) -> Result<SideValues> {
        self.ctx.values(x)
    }

    pub fn decode(&self, received: &BitSequence) -> Result<DecodeReport> {
        self.ctx.decode(received, &self.side.values)
    }
}

/// Decodes a word hit by two bursts, given the code's side information.
pub fn decode_general(received: &BitSequence, side: &SideInfo) -> Result<BitSequence> {
    Ok(GeneralDecoder::new(side)?.decode(received)?.word)
}
