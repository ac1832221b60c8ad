//! Subkey candidates from a pair, the δ-set map `𝒢`, and key completion.

use std::collections::HashMap;

use super::pairs::{PairRecord, PlaintextTable};
use crate::differential::{Characteristic5R, DeltaSequence, DiffRow};
use crate::feistel::{Block, RoundFunctions};
use crate::quantum::CostLedger;

/// Round whose key is guessed below the distinguisher (`k₆`).
pub const LAST_GUESSED: usize = 6;

/// Candidates `(k₀, k₆)` for one pair in a 7-round working state
/// `v₇ ‖ v₆`: `k₀` makes `Δv₁ = 0` and `k₆` explains `Δv₇` from
/// `Δv₆ = X'`. Charges two Grover searches.
pub fn derive_key_candidates(pair: &PairRecord, f0: &[u32], f6: &[u32], ledger: &mut CostLedger) -> Vec<(u32, u32)> {
    let k0s = k0_candidates(&DiffRow::new(f0, pair.plaintext_difference().left), pair, ledger);
    let d = pair.output_difference();
    let k6s = k6_candidates(&DiffRow::new(f6, d.right), pair, ledger);
    k0s.iter().flat_map(|&k0| k6s.iter().map(move |&k6| (k0, k6))).collect()
}

pub(crate) fn k0_candidates(row: &DiffRow, pair: &PairRecord, ledger: &mut CostLedger) -> Vec<u32> {
    let dp = pair.plaintext_difference();
    debug_assert_eq!(row.input_difference(), dp.left);
    row.solve(dp.right, ledger).iter().map(|t| t ^ pair.p.left).collect()
}

pub(crate) fn k6_candidates(row: &DiffRow, pair: &PairRecord, ledger: &mut CostLedger) -> Vec<u32> {
    let d = pair.output_difference();
    debug_assert_eq!(row.input_difference(), d.right);
    row.solve(d.left, ledger).iter().map(|t| t ^ pair.w.right).collect()
}

/// The δ-set of `P` under `k₀`: `P_j` differs from `P` by `j` in `v₀`
/// and keeps `v₁` fixed.
pub fn delta_set(public: &RoundFunctions, p: Block, k0: u32, delta: usize) -> impl Iterator<Item = Block> + '_ {
    let base = public.eval(0, p.left ^ k0);
    (1..=delta as u32).map(move |j| Block::new(p.left ^ j, p.right ^ base ^ public.eval(0, p.left ^ k0 ^ j)))
}

/// Maps an oracle ciphertext to the state `v₆ ‖ v₅` after round 5 by undoing
/// the guessed suffix (`k₆` and any outer keys).
#[derive(Clone, Debug)]
pub struct Unwinder<'a> {
    pub public: &'a RoundFunctions,
    /// Keys of rounds `6..r`, ascending; empty for the 6-round cipher.
    pub suffix: Vec<u32>,
}

impl Unwinder<'_> {
    pub fn state5(&self, c: Block) -> Block {
        self.public.undo_rounds(c, &self.suffix)
    }
}

/// `𝒢`: the Δ-sequence of `v₅` over the δ-set built from `P` and `k₀`,
/// read from `T′_PC`. `None` if a δ-set plaintext was never queried.
pub fn g_function(
    public: &RoundFunctions,
    tpc: &PlaintextTable,
    unwinder: &Unwinder<'_>,
    p: Block,
    v5: u32,
    k0: u32,
    delta: usize,
) -> Option<DeltaSequence> {
    delta_set(public, p, k0, delta)
        .map(|pj| tpc.get(pj).map(|c| unwinder.state5(c).right ^ v5))
        .collect::<Option<Vec<u32>>>()
        .map(DeltaSequence)
}

/// Recovers the remaining subkeys once a claw fixes `k₀`, the suffix keys and
/// a characteristic, then checks the full key by trial encryption.
pub struct KeyCompleter<'a> {
    public: &'a RoundFunctions,
    known: Vec<(Block, Block)>,
    f5_preimages: HashMap<u32, Vec<u32>>,
}

impl<'a> KeyCompleter<'a> {
    pub fn new(public: &'a RoundFunctions, known: Vec<(Block, Block)>) -> Self {
        let mut f5_preimages: HashMap<u32, Vec<u32>> = HashMap::new();
        for (u, &y) in public.table(5).iter().enumerate() {
            f5_preimages.entry(y).or_default().push(u as u32);
        }
        Self { public, known, f5_preimages }
    }

    /// `state5 = v₆ ‖ v₅` of `P`. Returns the first full key (rounds
    /// `0..r`) consistent with every known pair, trying `k₁` in ascending
    /// order. Counts every trial encryption in `trials`.
    pub fn complete(
        &self,
        p: Block,
        k0: u32,
        state5: Block,
        ch: &Characteristic5R,
        suffix: &[u32],
        trials: &mut u64,
    ) -> Option<Vec<u32>> {
        let f = |round: usize, x: u32| self.public.eval(round, x);
        let (v6, v5) = (state5.left, state5.right);
        let (vm1, v0) = (p.right, p.left);
        let v1 = vm1 ^ f(0, k0 ^ v0);
        let v3 = v1 ^ f(2, ch.t2);
        if v5 != v3 ^ f(4, ch.t4) {
            return None;
        }
        let k3 = ch.t3 ^ v3;
        for k1 in 0..self.public.half_domain() as u32 {
            let v2 = v0 ^ f(1, k1 ^ v1);
            let v4 = v2 ^ f(3, ch.t3);
            let Some(us) = self.f5_preimages.get(&(v6 ^ v4)) else { continue };
            for &u in us {
                let mut keys = vec![k0, k1, ch.t2 ^ v2, k3, ch.t4 ^ v4, u ^ v5];
                keys.extend_from_slice(suffix);
                *trials += 1;
                if self.known.iter().all(|&(kp, kc)| self.public.encrypt_with(&keys, kp) == kc) {
                    return Some(keys);
                }
            }
        }
        None
    }
}
