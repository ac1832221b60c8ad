//! Key-recovery attacks built on the 5-round truncated distinguisher.
//!
//! * [`run_attack_6round_classical`]: classical baseline on 6 rounds.
//! * [`run_attack_7round`]: claw finding between `T_δ` and `𝒢` on 7 rounds.
//! * [`run_attack_rround`]: an outer search over the last `r - 7` subkeys
//!   wrapped around the 7-round attack.

mod inner;
pub mod keys;
pub mod pairs;
pub mod report;
mod rround;
mod seven;
mod six;
pub mod table;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum::ClawMode;

pub use pairs::{PairRecord, PairTable, PlaintextTable, Structures};
pub use report::AttackReport;
pub use rround::run_attack_rround;
pub use seven::{collect_pairs_7r, precompute_tdelta, run_attack_7round, run_attack_7round_on};
pub use six::run_attack_6round_classical;
pub use table::{CharacteristicCensus, TableEntry, TableTdelta};

/// Auto-δ keeps the expected number of false `T_δ` matches below `2^-8`.
pub const FALSE_MATCH_LOG2: f64 = -8.0;

/// Claw searches allowed per attack before giving up; each rejected claw
/// removes its candidate and restarts the search.
pub const MAX_CLAW_ATTEMPTS: u64 = 8;

/// Known plaintext/ciphertext pairs used to validate a completed key.
pub const VALIDATION_PAIRS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackParams {
    pub seed: u64,
    /// Input difference `X`; drawn from the seed when absent.
    pub x: Option<u32>,
    /// Δ-sequence length; chosen by the false-match rule when absent.
    pub delta: Option<usize>,
    pub claw_mode: ClawMode,
    /// Claw subset size `l`.
    pub subset_size: Option<usize>,
    /// Sampling-round cap for faithful claw finding.
    pub claw_cap: Option<u64>,
}

impl Default for AttackParams {
    fn default() -> Self {
        Self { seed: 0, x: None, delta: None, claw_mode: ClawMode::Faithful, subset_size: None, claw_cap: None }
    }
}

impl AttackParams {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// The 7-round family splits the half-block into thirds (`n ≡ 0 mod 6`);
/// the 6-round attack splits it in halves as well (`n ≡ 0 mod 12`).
pub(crate) fn check_block_size(n: u32, modulus: u32) -> Result<()> {
    if !n.is_multiple_of(modulus) {
        return Err(Error::Precondition(format!("this attack needs n divisible by {modulus}, got {n}")));
    }
    Ok(())
}

/// Uses `params.x` or draws an `X` with a nonzero bit above `free_bits`, so
/// that `X` is never itself an admissible output difference.
pub(crate) fn choose_x(params: &AttackParams, half_bits: u32, free_bits: u32) -> Result<u32> {
    let domain = 1u32 << half_bits;
    match params.x {
        Some(x) if x == 0 || x >= domain => {
            Err(Error::InvalidParameter(format!("X = {x:#x} must be a nonzero {half_bits}-bit value")))
        }
        Some(x) => Ok(x),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x58_5f_44_49_46_46);
            loop {
                let x = rng.gen_range(1..domain);
                if x >> free_bits != 0 {
                    return Ok(x);
                }
            }
        }
    }
}

/// Smallest `δ ≥ start` with `pairs · sequences · 2^{-hδ} < 2^-8`, capped at
/// `2^h - 1`.
pub fn auto_delta(start: usize, pairs: u64, sequences: u64, half_bits: u32) -> usize {
    let load = (pairs.max(1) as f64).log2() + (sequences.max(1) as f64).log2();
    let max = (1usize << half_bits) - 1;
    (start..=max).find(|&d| load - ((half_bits as usize * d) as f64) < FALSE_MATCH_LOG2).unwrap_or(max)
}

pub(crate) fn resolve_delta(
    params: &AttackParams,
    start: usize,
    pairs: u64,
    sequences: u64,
    half_bits: u32,
) -> Result<(usize, bool)> {
    match params.delta {
        Some(d) if d == 0 || d >= 1 << half_bits => {
            Err(Error::InvalidParameter(format!("delta {d} must lie in 1..{}", 1u64 << half_bits)))
        }
        Some(d) => Ok((d, false)),
        None => Ok((auto_delta(start, pairs, sequences, half_bits), true)),
    }
}
