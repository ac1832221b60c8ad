//! The 7-round claw search and key completion, shared by the 7-round attack
//! and every outer-key branch of the r-round attack.

use std::cell::Cell;
use std::collections::HashSet;

use super::keys::{g_function, k0_candidates, k6_candidates, KeyCompleter, Unwinder, LAST_GUESSED};
use super::pairs::{PairRecord, PlaintextTable};
use super::report::{MatchRecord, Trials};
use super::table::TableTdelta;
use super::{AttackParams, MAX_CLAW_ATTEMPTS};
use crate::differential::{DeltaSequence, DiffRow};
use crate::error::Result;
use crate::feistel::RoundFunctions;
use crate::quantum::{ceil_sqrt_ratio, claw_find, ClawInstance, CostLedger};

pub(crate) struct InnerSetup<'a> {
    pub public: &'a RoundFunctions,
    pub table: &'a TableTdelta,
    pub tpc: &'a PlaintextTable,
    pub completer: &'a KeyCompleter<'a>,
    pub f0_row: &'a DiffRow,
    /// Difference rows of `F₆`, indexed by `X'`.
    pub f6_rows: &'a [DiffRow],
    pub params: &'a AttackParams,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    pair: usize,
    k0: u32,
    k6: u32,
}

#[derive(Debug, Default)]
pub(crate) struct InnerOutcome {
    pub ledger: CostLedger,
    pub candidates: u64,
    pub claw_found: bool,
    pub keys: Option<Vec<u32>>,
    pub matched: Option<MatchRecord>,
    pub trials: Trials,
}

pub(crate) fn f6_rows(public: &RoundFunctions, free_bits: u32) -> Vec<DiffRow> {
    (0..1u32 << free_bits).map(|xp| DiffRow::new(public.table(LAST_GUESSED), xp)).collect()
}

/// Runs the claw search between `T_δ` and `𝒢` over the candidates of
/// `pairs`, whose working states are `v₇ ‖ v₆` after undoing `outer`.
pub(crate) fn inner_attack(
    setup: &InnerSetup<'_>,
    pairs: &[PairRecord],
    outer: &[u32],
    seed: u64,
) -> Result<InnerOutcome> {
    let public = setup.public;
    let delta = setup.table.delta();
    let mut out = InnerOutcome::default();

    let mut cands = Vec::new();
    let mut prep = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let mut local = CostLedger::default();
        let k0s = k0_candidates(setup.f0_row, pair, &mut local);
        let k6s = k6_candidates(&setup.f6_rows[pair.output_difference().right as usize], pair, &mut local);
        for &k0 in &k0s {
            cands.extend(k6s.iter().map(|&k6| Candidate { pair: i, k0, k6 }));
        }
        prep.push(local);
    }
    out.candidates = cands.len() as u64;
    let prep = CostLedger::join_superposed(&prep);
    // candidate derivation, then the δ-set: one F₀ call and one round undone
    // per guessed round for every offset
    let g_depth = prep.modeled_quantum_time + 1 + (2 + outer.len() as u64) * delta as u64;

    let suffix_of = |c: &Candidate| -> Vec<u32> {
        let mut s = Vec::with_capacity(1 + outer.len());
        s.push(c.k6);
        s.extend_from_slice(outer);
        s
    };
    let evaluations = Cell::new(0u64);
    let g_eval = |c: &Candidate| -> Option<DeltaSequence> {
        evaluations.set(evaluations.get() + 1);
        let pair = &pairs[c.pair];
        let v5 = public.unround(LAST_GUESSED, c.k6, pair.w).right;
        let unwinder = Unwinder { public, suffix: suffix_of(c) };
        g_function(public, setup.tpc, &unwinder, pair.p, v5, c.k0, delta)
    };

    let entries = setup.table.entries();
    let mut excluded: HashSet<usize> = HashSet::new();
    for attempt in 0..MAX_CLAW_ATTEMPTS {
        let inst = ClawInstance {
            domain_f: entries.len(),
            domain_g: cands.len(),
            f: |i: usize| Some(entries[i].sequence.clone()),
            g: |b: usize| if excluded.contains(&b) { None } else { g_eval(&cands[b]) },
            subset_size: setup.params.subset_size,
            evaluation_depth: g_depth,
        };
        let claw_seed = seed ^ attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let outcome = claw_find(&inst, claw_seed, setup.params.claw_mode, setup.params.claw_cap, &mut out.ledger)?;
        let b_size = (outcome.subset_size * outcome.subset_size).min(cands.len()).max(1);
        out.ledger.charge_lookups(outcome.modeled_rounds * ceil_sqrt_ratio(b_size as u128, 1) * delta as u64);
        out.trials.claw_attempts += 1;
        out.trials.sampling_rounds += outcome.rounds_executed;
        out.trials.modeled_claw_rounds += outcome.modeled_rounds;
        out.trials.subset_size = outcome.subset_size as u64;
        let Some(claw) = outcome.claw else { break };
        out.claw_found = true;

        let cand = cands[claw.y];
        let pair = &pairs[cand.pair];
        let seq = g_eval(&cand).expect("claw candidate has a sequence");
        let x_prime = pair.output_difference().right;
        let state5 = public.unround(LAST_GUESSED, cand.k6, pair.w);
        let suffix = suffix_of(&cand);
        for &idx in setup.table.lookup(&seq) {
            let ch = &entries[idx as usize].ch;
            if ch.x_prime != x_prime {
                continue;
            }
            if let Some(keys) =
                setup.completer.complete(pair.p, cand.k0, state5, ch, &suffix, &mut out.trials.completion_trials)
            {
                out.keys = Some(keys);
                out.matched = Some(MatchRecord {
                    table_entry: idx as usize,
                    x_prime,
                    y: ch.y,
                    t2: ch.t2,
                    t3: ch.t3,
                    t4: ch.t4,
                    pair_index: cand.pair,
                    k0: cand.k0,
                    k6: Some(cand.k6),
                });
                break;
            }
        }
        if out.keys.is_some() {
            break;
        }
        out.trials.false_matches += 1;
        excluded.insert(claw.y);
    }
    out.trials.g_evaluations = evaluations.get();
    Ok(out)
}
