use serde::{Deserialize, Serialize};

use crate::cost::ComparisonRow;
use crate::quantum::{ClawMode, CostLedger};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    SixRoundClassical,
    SevenRound,
    RRound,
}

/// The claw (or table match) that led to key recovery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub table_entry: usize,
    pub x_prime: u32,
    pub y: u32,
    pub t2: u32,
    pub t3: u32,
    pub t4: u32,
    pub pair_index: usize,
    pub k0: u32,
    pub k6: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trials {
    /// Claw searches started (one more per rejected claw).
    pub claw_attempts: u64,
    /// Claws or matches whose key completion failed.
    pub false_matches: u64,
    /// Subset-sampling rounds actually executed.
    pub sampling_rounds: u64,
    /// Amplification rounds charged by the model.
    pub modeled_claw_rounds: u64,
    pub subset_size: u64,
    /// `𝒢` evaluations on distinct candidates.
    pub g_evaluations: u64,
    /// Trial encryptions during key completion.
    pub completion_trials: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    /// `(X', Y)` keys searched during precomputation.
    pub characteristic_keys: u64,
    pub populated_keys: u64,
    pub table_entries: u64,
    /// Stored Δ values, `entries × δ`.
    pub table_cells: u64,
    pub structures: u64,
    pub structure_queries: u64,
    /// Pairs surviving the ciphertext filter (for `r > 7`, under the
    /// correct outer key if it was found, otherwise the largest count).
    pub filtered_pairs: u64,
    /// Unfiltered cross pairs available to the outer search.
    pub cross_pairs: u64,
    /// `(pair, k₀, k₆)` candidates on the `𝒢` side of the claw.
    pub candidates: u64,
    /// Plaintexts held in `T′_PC` after δ-set demand was served.
    pub plaintext_table: u64,
    pub delta_set_queries: u64,
    /// `2^{2n/3 + 1 + δ}`, the nominal `T′_PC` size.
    pub nominal_plaintext_table_log2: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageLedgers {
    pub precompute: CostLedger,
    pub online: CostLedger,
}

/// Outer search over the keys of rounds `7..r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterSearch {
    pub key_bits: u32,
    pub iterations: u64,
    /// Outer keys for which the inner claw search found a claw.
    pub marked_keys: Vec<u64>,
    /// Outer key whose completion passed trial encryption.
    pub validated_key: Option<u64>,
    /// Superposed join of all inner searches.
    pub inner: CostLedger,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: AttackKind,
    pub n: u32,
    pub r: usize,
    pub seed: u64,
    pub x: u32,
    pub delta: usize,
    pub delta_auto: bool,
    pub claw_mode: Option<ClawMode>,
    pub success: bool,
    pub recovered_subkeys: Option<Vec<u32>>,
    pub matched: Option<MatchRecord>,
    pub trials: Trials,
    pub ledger: CostLedger,
    pub stages: StageLedgers,
    pub sizes: Sizes,
    pub outer: Option<OuterSearch>,
    pub comparison: Vec<ComparisonRow>,
    pub notes: Vec<String>,
    pub wall_clock_ms: u64,
}
