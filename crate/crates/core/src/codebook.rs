//! Enumerated codebooks and their on-disk format.
//!
//! A codebook file is one header line, `#codebook ` followed by a JSON
//! object with the construction id and parameters, then one codeword per
//! line as a bit string, sorted.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqcore::BitSequence;

const HEADER: &str = "#codebook ";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookHeader {
    pub construction: String,
    pub n: usize,
    pub t1: usize,
    pub t2: usize,
    /// Construction-specific parameters, values as decimal strings or lists.
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    pub header: CodebookHeader,
    words: Vec<BitSequence>,
}

impl Codebook {
    pub fn new(header: CodebookHeader, mut words: Vec<BitSequence>) -> Result<Self> {
        if let Some(w) = words.iter().find(|w| w.len() != header.n) {
            return Err(Error::LengthMismatch {
                left: w.len(),
                right: header.n,
            });
        }
        words.sort_unstable();
        words.dedup();
        Ok(Codebook { header, words })
    }

    pub fn words(&self) -> &[BitSequence] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, x: &BitSequence) -> bool {
        self.words.binary_search(x).is_ok()
    }

    /// Codeword with the given index in sorted order.
    pub fn encode(&self, msg: u128) -> Result<BitSequence> {
        usize::try_from(msg)
            .ok()
            .and_then(|m| self.words.get(m).copied())
            .ok_or(Error::MessageOutOfRange {
                msg,
                count: self.words.len() as u128,
            })
    }

    /// Index of a codeword, if present.
    pub fn index_of(&self, x: &BitSequence) -> Option<usize> {
        self.words.binary_search(x).ok()
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let head = serde_json::to_string(&self.header).map_err(|e| Error::Format(e.to_string()))?;
        let io = |e: std::io::Error| Error::Format(e.to_string());
        writeln!(out, "{HEADER}{head}").map_err(io)?;
        for w in &self.words {
            writeln!(out, "{w}").map_err(io)?;
        }
        Ok(())
    }

    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Format("missing header".into()))?
            .map_err(|e| Error::Format(e.to_string()))?;
        let json = first
            .strip_prefix(HEADER)
            .ok_or_else(|| Error::Format(format!("header must start with {HEADER:?}")))?;
        let header: CodebookHeader =
            serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))?;
        let mut words = Vec::new();
        for line in lines {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            words.push(line.parse()?);
        }
        Codebook::new(header, words)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Codebook {
        let mut params = BTreeMap::new();
        params.insert("q".into(), serde_json::json!("17"));
        let header = CodebookHeader {
            construction: "tt".into(),
            n: 4,
            t1: 2,
            t2: 2,
            params,
        };
        let words = ["1100", "0011", "0101", "0011"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        Codebook::new(header, words).unwrap()
    }

    #[test]
    fn round_trip() {
        let c = sample();
        assert_eq!(c.len(), 3);
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#codebook {"));
        assert_eq!(text.lines().nth(1), Some("0011"));
        assert_eq!(Codebook::read_from(&buf[..]).unwrap(), c);
    }

    #[test]
    fn encode_by_rank() {
        let c = sample();
        assert_eq!(c.encode(1).unwrap().to_string(), "0101");
        assert!(matches!(c.encode(3), Err(Error::MessageOutOfRange { .. })));
        assert_eq!(c.index_of(&"1100".parse().unwrap()), Some(2));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Codebook::read_from(&b"0101\n"[..]).is_err());
        assert!(Codebook::read_from(&b""[..]).is_err());
        let bad = b"#codebook {\"construction\":\"tt\",\"n\":3,\"t1\":1,\"t2\":1}\n0101\n";
        assert!(Codebook::read_from(&bad[..]).is_err());
    }
}
