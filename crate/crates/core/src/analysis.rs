//! Confusability graphs, code search, size bounds and exhaustive checks of
//! the equivalences between burst models.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{self, ChannelSpec, Model, Shape, Variant};
use crate::error::{invalid, Result};
use crate::seqcore::BitSequence;

/// Simple undirected graph on all words of length `n`, stored as bit rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusabilityGraph {
    n: usize,
    rows: Vec<Vec<u64>>,
}

impl ConfusabilityGraph {
    fn empty(n: usize) -> Self {
        let v = 1usize << n;
        ConfusabilityGraph {
            n,
            rows: vec![vec![0u64; v.div_ceil(64)]; v],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.rows.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a][b / 64] >> (b % 64) & 1 == 1
    }

    pub fn degree(&self, a: usize) -> usize {
        self.rows[a].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbours(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[a].iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }

    pub fn edge_count(&self) -> usize {
        (0..self.vertex_count()).map(|a| self.degree(a)).sum::<usize>() / 2
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_count())
            .flat_map(|a| self.neighbours(a).filter(move |&b| b > a).map(move |b| (a, b)))
            .collect()
    }

    /// First pair (in lexicographic order) adjacent in exactly one graph.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize)> {
        for a in 0..self.vertex_count() {
            for (k, (x, y)) in self.rows[a].iter().zip(&other.rows[a]).enumerate() {
                let diff = x ^ y;
                if diff != 0 {
                    return Some((a, k * 64 + diff.trailing_zeros() as usize));
                }
            }
        }
        None
    }

    pub fn symmetric_difference_size(&self, other: &Self) -> usize {
        let total: usize = self
            .rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x ^ y).count_ones() as usize))
            .sum();
        total / 2
    }

    fn add_clique(&mut self, members: &[u32]) {
        let mut mask = vec![0u64; self.rows[0].len()];
        for &m in members {
            mask[m as usize / 64] |= 1 << (m % 64);
        }
        for &m in members {
            for (r, w) in self.rows[m as usize].iter_mut().zip(&mask) {
                *r |= w;
            }
        }
    }

    fn clear_loops(&mut self) {
        for a in 0..self.rows.len() {
            self.rows[a][a / 64] &= !(1 << (a % 64));
        }
    }
}

/// Builds the graph whose edges join words with intersecting `ball_of` sets.
pub fn build_graph_with<F>(n: usize, ball_of: F) -> Result<ConfusabilityGraph>
where
    F: Fn(&BitSequence) -> Result<Vec<BitSequence>> + Sync,
{
    crate::check_budget("confusability graph", n)?;
    let words: Vec<BitSequence> = BitSequence::all(n).collect();
    let balls: Vec<Vec<BitSequence>> = words.par_iter().map(&ball_of).collect::<Result<_>>()?;
    let mut index: HashMap<BitSequence, Vec<u32>> = HashMap::new();
    for (k, b) in balls.iter().enumerate() {
        for y in b {
            index.entry(*y).or_default().push(k as u32);
        }
    }
    let mut g = ConfusabilityGraph::empty(n);
    let mut groups: Vec<(BitSequence, Vec<u32>)> = index.into_iter().collect();
    groups.sort_unstable_by_key(|(y, _)| *y);
    for (_, members) in groups {
        if members.len() > 1 {
            g.add_clique(&members);
        }
    }
    g.clear_loops();
    Ok(g)
}

/// Exact confusability graph of the m-burst channel `spec` on length `n`.
pub fn build_graph(n: usize, spec: &ChannelSpec) -> Result<ConfusabilityGraph> {
    build_graph_with(n, |x| channel::ball(x, spec))
}

/// Maximal independent set by repeatedly taking the vertex of least
/// remaining degree (ties to the lexicographically smallest word).
pub fn greedy_code(g: &ConfusabilityGraph) -> Vec<BitSequence> {
    let v = g.vertex_count();
    let mut alive = vec![true; v];
    let mut deg: Vec<usize> = (0..v).map(|a| g.degree(a)).collect();
    let mut code = Vec::new();
    while let Some(pick) = (0..v).filter(|&a| alive[a]).min_by_key(|&a| (deg[a], a)) {
        code.push(BitSequence::raw(pick as u64, g.n()));
        let mut removed = vec![pick];
        removed.extend(g.neighbours(pick).filter(|&b| alive[b]));
        for &r in &removed {
            alive[r] = false;
        }
        for &r in &removed {
            for b in g.neighbours(r) {
                if alive[b] {
                    deg[b] -= 1;
                }
            }
        }
    }
    code
}

/// Exact maximum independent set by branch and bound (n <= 10).
pub fn maximum_independent_set(g: &ConfusabilityGraph) -> Result<Vec<BitSequence>> {
    if g.n() > 10 {
        return Err(crate::Error::BudgetExceeded {
            what: format!("exact independent set with n = {}", g.n()),
            limit: 10,
        });
    }
    let v = g.vertex_count();
    let words = v.div_ceil(64);
    let mut best = greedy_code(g).iter().map(|w| w.value() as usize).collect::<Vec<_>>();
    let mut all = vec![0u64; words];
    for a in 0..v {
        all[a / 64] |= 1 << (a % 64);
    }
    let mut current = Vec::new();
    mis_rec(g, &all, &mut current, &mut best);
    best.sort_unstable();
    Ok(best.into_iter().map(|a| BitSequence::raw(a as u64, g.n())).collect())
}

fn count(set: &[u64]) -> usize {
    set.iter().map(|w| w.count_ones() as usize).sum()
}

fn first_member(set: &[u64]) -> Option<usize> {
    set.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
}

fn members(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter()
        .enumerate()
        .flat_map(|(k, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b))
}

// upper bound on the independence number of the induced subgraph: greedy
// clique cover, since an independent set takes at most one vertex per clique
fn clique_cover_bound(g: &ConfusabilityGraph, set: &[u64]) -> usize {
    let mut rest = set.to_vec();
    let mut cliques = 0;
    while let Some(a) = first_member(&rest) {
        let mut cand: Vec<u64> = rest.iter().zip(&g.rows[a]).map(|(r, n)| r & n).collect();
        rest[a / 64] &= !(1 << (a % 64));
        while let Some(b) = first_member(&cand) {
            cand[b / 64] &= !(1 << (b % 64));
            rest[b / 64] &= !(1 << (b % 64));
            for (c, n) in cand.iter_mut().zip(&g.rows[b]) {
                *c &= n;
            }
        }
        cliques += 1;
    }
    cliques
}

fn mis_rec(g: &ConfusabilityGraph, set: &[u64], current: &mut Vec<usize>, best: &mut Vec<usize>) {
    if count(set) == 0 {
        if current.len() > best.len() {
            *best = current.clone();
        }
        return;
    }
    if current.len() + clique_cover_bound(g, set) <= best.len() {
        return;
    }
    // some maximum independent set contains the min-degree vertex or a neighbour of it
    let deg = |a: usize| -> usize {
        set.iter().zip(&g.rows[a]).map(|(s, r)| (s & r).count_ones() as usize).sum()
    };
    let v = members(set).min_by_key(|&a| (deg(a), a)).unwrap();
    let mut branch: Vec<usize> = vec![v];
    branch.extend(members(set).filter(|&b| g.has_edge(v, b)));
    for u in branch {
        let next: Vec<u64> = set
            .iter()
            .zip(&g.rows[u])
            .enumerate()
            .map(|(k, (s, r))| {
                let own = if u / 64 == k { 1u64 << (u % 64) } else { 0 };
                s & !r & !own
            })
            .collect();
        current.push(u);
        mis_rec(g, &next, current, best);
        current.pop();
    }
}

/// Bound values as exact rationals and integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub lower: BigRational,
    pub upper: BigRational,
    pub a1: BigUint,
    pub a2: BigUint,
}

fn big(v: usize) -> BigUint {
    BigUint::from(v)
}

fn pow2(e: usize) -> BigUint {
    BigUint::one() << e
}

fn choose2(v: usize) -> BigUint {
    binomial(big(v), big(2))
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// `2^(n-2t1-2t2) / (C(n-2t1+2,2) * C(n-2t1+2t2+1,2))`.
pub fn lower_bound(n: usize, t1: usize, t2: usize) -> Result<BigRational> {
    if t1 == 0 && t2 == 0 {
        return Err(invalid("t1 = t2 = 0 is not a burst channel"));
    }
    if n <= 2 * t1 {
        return Err(invalid(format!("need n > 2*t1, got n = {n}, t1 = {t1}")));
    }
    let den = choose2(n - 2 * t1 + 2) * choose2(n - 2 * t1 + 2 * t2 + 1);
    // negative exponents appear when n < 2t1 + 2t2
    Ok(if n >= 2 * t1 + 2 * t2 {
        ratio(pow2(n - 2 * t1 - 2 * t2), den)
    } else {
        ratio(BigUint::one(), den * pow2(2 * t1 + 2 * t2 - n))
    })
}

/// `2^(2t2-2) * (C(n-2t1+2,2) + 1)`.
pub fn ball_size_closed_form(n: usize, t1: usize, t2: usize) -> Result<BigUint> {
    if t2 == 0 || n <= 2 * t1 {
        return Err(invalid(format!(
            "closed form needs t2 >= 1 and n > 2*t1 (n = {n}, t1 = {t1}, t2 = {t2})"
        )));
    }
    Ok(pow2(2 * t2 - 2) * (choose2(n - 2 * t1 + 2) + BigUint::one()))
}

/// `2^n / max(a1, a2)` together with the lower bound.
pub fn bounds(n: usize, t1: usize, t2: usize) -> Result<BoundReport> {
    if t2 == 0 || t1 < t2 || n <= 2 * t1 {
        return Err(invalid(format!(
            "bounds need t1 >= t2 >= 1 and n > 2*t1 (n = {n}, t1 = {t1}, t2 = {t2})"
        )));
    }
    let a1 = pow2(2 * t1 - 2) * (choose2(n - 2 * t1 + 2) + BigUint::one());
    let a2 = pow2(2 * t2 - 2) * (choose2(n - 2 * t2 + 2) + BigUint::one());
    let upper = ratio(pow2(n), a1.clone().max(a2.clone()));
    Ok(BoundReport {
        lower: lower_bound(n, t1, t2)?,
        upper,
        a1,
        a2,
    })
}

pub fn upper_bound(n: usize, t1: usize, t2: usize) -> Result<BigRational> {
    Ok(bounds(n, t1, t2)?.upper)
}

/// Outcome of an exhaustive edge-set comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub check: String,
    pub n: usize,
    pub t1: usize,
    pub t2: usize,
    pub variant: Variant,
    pub edges_left: usize,
    pub edges_right: usize,
    pub counterexamples: usize,
    pub first: Option<(BitSequence, BitSequence)>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.counterexamples == 0
    }
}

fn compare(
    check: &str,
    n: usize,
    t1: usize,
    t2: usize,
    variant: Variant,
    left: &ConfusabilityGraph,
    right: &ConfusabilityGraph,
) -> EquivalenceReport {
    EquivalenceReport {
        check: check.into(),
        n,
        t1,
        t2,
        variant,
        edges_left: left.edge_count(),
        edges_right: right.edge_count(),
        counterexamples: left.symmetric_difference_size(right),
        first: left
            .first_difference(right)
            .map(|(a, b)| (BitSequence::raw(a as u64, n), BitSequence::raw(b as u64, n))),
    }
}

/// Two `(t1,t2)` bursts versus two `(t2,t1)` bursts: equal edge sets?
pub fn verify_thm1(n: usize, t1: usize, t2: usize, variant: Variant) -> Result<EquivalenceReport> {
    let left = build_graph(n, &ChannelSpec::new(2, t1, t2, Model::Di, variant))?;
    let right = build_graph(n, &ChannelSpec::new(2, t2, t1, Model::Di, variant))?;
    Ok(compare("two-burst swap", n, t1, t2, variant, &left, &right))
}

/// Two `(t1,t2)` bursts versus one `(t1,t2)` plus one `(t2,t1)` burst.
pub fn verify_thm2(n: usize, t1: usize, t2: usize, variant: Variant) -> Result<EquivalenceReport> {
    let left = build_graph(n, &ChannelSpec::new(2, t1, t2, Model::Di, variant))?;
    let right = build_graph_with(n, |x| Ok(channel::ball_mixed(x, t1, t2, variant)))?;
    Ok(compare("mixed bursts", n, t1, t2, variant, &left, &right))
}

/// `m1` bursts of `(t1,t2)` and `m2` of `(t2,t1)` (in every interleaving)
/// versus `m1 + m2` bursts of `(t1,t2)`.
pub fn verify_corollary(
    n: usize,
    t1: usize,
    t2: usize,
    m1: usize,
    m2: usize,
    variant: Variant,
) -> Result<EquivalenceReport> {
    let m = m1 + m2;
    let left = build_graph(n, &ChannelSpec::new(m, t1, t2, Model::Di, variant))?;
    let a = Shape::new(t1, t2);
    let orders: Vec<Vec<Shape>> = (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize == m2)
        .map(|mask| {
            (0..m)
                .map(|k| if mask >> k & 1 == 1 { a.swapped() } else { a })
                .collect()
        })
        .collect();
    let right = build_graph_with(n, |x| {
        let mut out = Vec::new();
        for order in &orders {
            channel::for_each_output(x, order, Model::Di, variant, |y, _| out.push(y));
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    })?;
    Ok(compare("mixed-burst corollary", n, t1, t2, variant, &left, &right))
}

/// Outcome of the exhaustive ball-size check against the closed form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallSizeReport {
    pub n: usize,
    pub t1: usize,
    pub t2: usize,
    pub expected: String,
    pub words_checked: usize,
    pub mismatches: usize,
    pub first: Option<(BitSequence, usize)>,
}

impl BallSizeReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Checks the partition-variant ball size of every word of length `n`.
pub fn verify_ball_size(n: usize, t1: usize, t2: usize) -> Result<BallSizeReport> {
    crate::check_budget("ball size scan", n)?;
    let expected = ball_size_closed_form(n, t1, t2)?;
    let want = expected.to_usize().unwrap_or(usize::MAX);
    let spec = ChannelSpec::new(2, t1, t2, Model::Di, Variant::Partition);
    let sizes: Vec<(BitSequence, usize)> = BitSequence::all(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| Ok((x, channel::ball(&x, &spec)?.len())))
        .collect::<Result<_>>()?;
    let bad: Vec<&(BitSequence, usize)> = sizes.iter().filter(|(_, s)| *s != want).collect();
    Ok(BallSizeReport {
        n,
        t1,
        t2,
        expected: expected.to_string(),
        words_checked: sizes.len(),
        mismatches: bad.len(),
        first: bad.first().map(|p| **p),
    })
}

/// Lower bound, greedy size and upper bound for one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sandwich {
    pub lower: BigRational,
    pub code_size: usize,
    pub upper: BigRational,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        let size = BigRational::from_integer(self.code_size.into());
        self.lower <= size && size <= self.upper
    }
}

/// Builds the greedy code for two `(t1,t2)` bursts under `variant` and
/// places its size between the two bounds.
pub fn sandwich(n: usize, t1: usize, t2: usize, variant: Variant) -> Result<Sandwich> {
    let report = bounds(n, t1, t2)?;
    let g = build_graph(n, &ChannelSpec::new(2, t1, t2, Model::Di, variant))?;
    Ok(Sandwich {
        lower: report.lower,
        code_size: greedy_code(&g).len(),
        upper: report.upper,
    })
}
