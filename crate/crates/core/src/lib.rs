//! Codes for two non-overlapping bursts of deletion-insertion errors on
//! binary sequences.
//!
//! The crate is organised bottom-up:
//!
//! * [`seqcore`]: bit sequences, runs, regularity, folding.
//! * [`channel`]: burst patterns, error balls, partition cells, neighbourhoods.
//! * [`analysis`]: confusability graphs, code search, size bounds and the
//!   equivalence checks between burst models.
//! * [`regular_enc`]: ranking encoder for d-regular sequences and the
//!   first-row regularisation map.
//! * [`gfrs`]: prime-field Reed-Solomon codes and coset selection.
//! * [`code_tt`]: the equal-length construction (`t1 = t2 = t`).
//! * [`syncomp`]: syndrome compression and window inversion.
//! * [`code_general`]: the locate-then-correct construction for `t1 > t2`.
//! * [`codebook`]: codebook metadata and file format.

pub mod analysis;
pub mod channel;
pub mod code_general;
pub mod code_tt;
pub mod codebook;
pub mod error;
pub mod gfrs;
pub mod regular_enc;
pub mod seqcore;
pub mod syncomp;

pub use error::{Error, Result};
pub use seqcore::{BitSequence, Interval};

/// Default cap on `2^n` for exhaustive enumerations.
pub const DEFAULT_BUDGET_BITS: usize = 16;

/// Environment variable overriding [`DEFAULT_BUDGET_BITS`].
pub const BUDGET_ENV: &str = "BURST_ECC_BUDGET_BITS";

/// The active enumeration budget, in bits of word length.
pub fn budget_bits() -> usize {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_BUDGET_BITS)
}

/// Refuses an enumeration over `2^n` words past [`budget_bits`].
pub fn check_budget(what: &str, n: usize) -> Result<()> {
    let limit = budget_bits();
    if n > limit {
        return Err(Error::BudgetExceeded {
            what: format!("{what} with n = {n}"),
            limit,
        });
    }
    Ok(())
}
