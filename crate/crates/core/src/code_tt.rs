//! Codes for two bursts of `(t,t)`-DI.
//!
//! The word is read as `2^(t-1)`-ary symbols (blocks of `t-1` bits). One
//! `(t,t)` burst touches at most two adjacent symbols, so two bursts are at
//! most four symbol errors, which a distance-9 Reed-Solomon coset corrects.
//! For `t = 1` the bursts are two substitutions and distance 5 suffices.

use serde::Serialize;

use crate::channel::{self, ChannelSpec, Model, Shape, Variant};
use crate::codebook::{Codebook, CodebookHeader};
use crate::error::{invalid, Error, Result};
use crate::gfrs::{best_coset, choose_q, RsCode};
use crate::seqcore::{fold_qary, unfold_qary, BitSequence, QarySequence};

/// Symbol view of `x`: blocks of `t-1` bits, or single bits when `t = 1`.
pub fn symbols(x: &BitSequence, t: usize) -> Result<Vec<u64>> {
    if t <= 1 {
        return Ok(x.iter().map(u64::from).collect());
    }
    Ok(fold_qary(x, t)?.symbols().iter().map(|&s| u64::from(s)).collect())
}

fn from_symbols(s: &[u64], t: usize) -> Result<BitSequence> {
    let width = t.max(2) - 1;
    if let Some(v) = s.iter().find(|&&v| v >> width != 0) {
        return Err(Error::Undecodable(format!(
            "decoded symbol {v} is not a {width}-bit block"
        )));
    }
    let q = QarySequence::new(s.iter().map(|&v| v as u32).collect(), width as u32)?;
    unfold_qary(&q)
}

/// Outcome of the single-burst symbol-footprint check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FootprintReport {
    pub patterns: usize,
    pub violations: usize,
    pub max_changed_symbols: usize,
    pub first_violation: Option<(BitSequence, BitSequence)>,
}

impl FootprintReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks that every single `(t,t)`-DI burst on `x` changes only symbols
/// inside one window of two adjacent positions of the symbol view.
pub fn lemma4_check(x: &BitSequence, t: usize) -> Result<FootprintReport> {
    if t < 2 {
        return Err(invalid("the symbol footprint check needs t >= 2"));
    }
    if !x.len().is_multiple_of(t - 1) {
        return Err(invalid(format!("t - 1 = {} must divide n = {}", t - 1, x.len())));
    }
    let base = symbols(x, t)?;
    let mut report = FootprintReport {
        patterns: 0,
        violations: 0,
        max_changed_symbols: 0,
        first_violation: None,
    };
    let mut outputs = Vec::new();
    channel::for_each_output(x, &[Shape::new(t, t)], Model::Di, Variant::Strict, |y, _| {
        outputs.push(y)
    });
    for y in outputs {
        report.patterns += 1;
        let sy = symbols(&y, t)?;
        let changed: Vec<usize> = (0..base.len()).filter(|&j| base[j] != sy[j]).collect();
        report.max_changed_symbols = report.max_changed_symbols.max(changed.len());
        if let (Some(a), Some(b)) = (changed.first(), changed.last()) {
            if b - a > 1 {
                report.violations += 1;
                report.first_violation.get_or_insert((*x, y));
            }
        }
    }
    Ok(report)
}

/// The coset code `{x : symbols(x) in C + u}`.
#[derive(Clone, Debug)]
pub struct TtCode {
    n: usize,
    t: usize,
    code: RsCode,
    shift: Vec<u64>,
    target: Vec<u64>,
}

impl TtCode {
    /// Builds the code; with `shift = None` the most populous coset over all
    /// words of length `n` is chosen (exhaustive, within budget).
    pub fn new(n: usize, t: usize, shift: Option<Vec<u64>>) -> Result<Self> {
        if t == 0 {
            return Err(invalid("t must be at least 1"));
        }
        if t >= 2 && !n.is_multiple_of(t - 1) {
            return Err(invalid(format!("t - 1 = {} must divide n = {n}", t - 1)));
        }
        let len = if t >= 2 { n / (t - 1) } else { n };
        let d_min = if t >= 2 { 9 } else { 5 };
        if len < d_min {
            return Err(invalid(format!(
                "{len} symbols cannot carry a distance-{d_min} code"
            )));
        }
        let code = RsCode::with_distance(choose_q(n, t)?, len, d_min)?;
        let shift = match shift {
            Some(u) => code.coset_leader(&u)?,
            None => {
                crate::check_budget("coset selection", n)?;
                let population: Vec<Vec<u64>> = BitSequence::all(n)
                    .map(|x| symbols(&x, t))
                    .collect::<Result<_>>()?;
                best_coset(&code, &population)?.0
            }
        };
        let target = code.syndrome(&shift)?;
        Ok(TtCode {
            n,
            t,
            code,
            shift,
            target,
        })
    }

    /// The code that contains `x` (its coset leader as the shift).
    pub fn containing(x: &BitSequence, t: usize) -> Result<Self> {
        Self::new(x.len(), t, Some(symbols(x, t)?))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn rs(&self) -> &RsCode {
        &self.code
    }

    pub fn shift(&self) -> &[u64] {
        &self.shift
    }

    pub fn contains(&self, x: &BitSequence) -> Result<bool> {
        if x.len() != self.n {
            return Ok(false);
        }
        Ok(self.code.syndrome(&symbols(x, self.t)?)? == self.target)
    }

    pub fn spec(&self) -> ChannelSpec {
        ChannelSpec::di(2, self.t, self.t)
    }

    /// Every codeword, by exhaustive sieve.
    pub fn members(&self) -> Result<Vec<BitSequence>> {
        crate::check_budget("codebook sieve", self.n)?;
        let mut out = Vec::new();
        for x in BitSequence::all(self.n) {
            if self.contains(&x)? {
                out.push(x);
            }
        }
        Ok(out)
    }

    pub fn codebook(&self) -> Result<Codebook> {
        let mut params = std::collections::BTreeMap::new();
        params.insert("q".into(), serde_json::json!(self.code.q().to_string()));
        params.insert("d_min".into(), serde_json::json!(self.code.d_min().to_string()));
        params.insert(
            "u".into(),
            serde_json::json!(self.shift.iter().map(u64::to_string).collect::<Vec<_>>()),
        );
        let header = CodebookHeader {
            construction: "tt".into(),
            n: self.n,
            t1: self.t,
            t2: self.t,
            params,
        };
        Codebook::new(header, self.members()?)
    }

    /// Recovers the codeword from a word hit by two `(t,t)` bursts.
    pub fn decode(&self, received: &BitSequence) -> Result<BitSequence> {
        if received.len() != self.n {
            return Err(Error::LengthMismatch {
                left: received.len(),
                right: self.n,
            });
        }
        let w = symbols(received, self.t)?;
        let decoded = self
            .code
            .coset_decode(&w, &self.shift)?
            .ok_or_else(|| Error::Undecodable("more symbol errors than the code corrects".into()))?;
        let x = from_symbols(&decoded.codeword, self.t)?;
        if x == *received {
            return Ok(x);
        }
        if channel::ball(&x, &self.spec())?.binary_search(received).is_err() {
            return Err(Error::Undecodable(format!(
                "{received} is not two bursts away from the decoded word {x}"
            )));
        }
        Ok(x)
    }
}

/// `TtCode` with the pigeonhole-best coset, or the supplied shift.
pub fn build_code_tt(n: usize, t: usize, shift: Option<Vec<u64>>) -> Result<TtCode> {
    TtCode::new(n, t, shift)
}

pub fn decode_tt(received: &BitSequence, code: &TtCode) -> Result<BitSequence> {
    code.decode(received)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn footprint_holds_exhaustively() {
        for t in [2, 3] {
            let mut worst = 0;
            for x in BitSequence::all(12) {
                let r = lemma4_check(&x, t).unwrap();
                assert!(r.passed(), "{r:?}");
                worst = worst.max(r.max_changed_symbols);
            }
            assert!(worst <= 2);
        }
        assert!(lemma4_check(&BitSequence::zeros(12).unwrap(), 1).is_err());
        assert!(lemma4_check(&BitSequence::zeros(11).unwrap(), 3).is_err());
    }

    #[test]
    fn pigeonhole_codebook_n16() {
        let code = TtCode::new(16, 2, None).unwrap();
        assert_eq!(code.rs().q(), 17);
        assert_eq!(code.rs().d_min(), 9);
        let members = code.members().unwrap();
        // 2^16 words over 17^8 cosets: the best one is nonempty
        assert!(!members.is_empty());
        for x in &members {
            assert_eq!(
                code.rs().syndrome(&symbols(x, 2).unwrap()).unwrap(),
                code.rs().syndrome(code.shift()).unwrap()
            );
        }
    }

    #[test]
    fn t1_uses_distance_five() {
        let x: BitSequence = "0110100110010110".parse().unwrap();
        let code = TtCode::containing(&x, 1).unwrap();
        assert_eq!(code.rs().d_min(), 5);
        for a in 0..16 {
            for b in a + 1..16 {
                let y = x.with_bit(a, 1 - x.bit(a)).with_bit(b, 1 - x.bit(b));
                assert_eq!(code.decode(&y).unwrap(), x);
            }
        }
    }

    #[test]
    fn every_two_burst_pattern_decodes_n16() {
        let code = TtCode::new(16, 2, None).unwrap();
        let spec = code.spec();
        for x in code.members().unwrap() {
            assert_eq!(code.decode(&x).unwrap(), x);
            for y in channel::ball(&x, &spec).unwrap() {
                assert_eq!(code.decode(&y).unwrap(), x, "{x} -> {y}");
            }
        }
    }

    #[test]
    fn sampled_t3_n18() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..300 {
            let x = BitSequence::from_value(rng.gen::<u64>(), 18).unwrap();
            let code = TtCode::containing(&x, 3).unwrap();
            assert!(code.contains(&x).unwrap());
            let ball = channel::ball(&x, &code.spec()).unwrap();
            for _ in 0..20 {
                let y = ball[rng.gen_range(0..ball.len())];
                assert_eq!(code.decode(&y).unwrap(), x);
            }
        }
    }

    #[test]
    fn guards() {
        assert!(TtCode::new(17, 3, Some(vec![0; 8])).is_err());
        assert!(TtCode::new(8, 2, None).is_err());
        let code = TtCode::new(16, 2, None).unwrap();
        assert!(code.decode(&BitSequence::zeros(15).unwrap()).is_err());
    }
}
