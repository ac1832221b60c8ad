use std::time::Instant;

use super::keys::{delta_set, k0_candidates, KeyCompleter};
use super::pairs::{PairRecord, Structures};
use super::report::{AttackKind, AttackReport, MatchRecord, Sizes, StageLedgers, Trials};
use super::table::{CharacteristicCensus, TableTdelta};
use super::{check_block_size, choose_x, resolve_delta, AttackParams, VALIDATION_PAIRS};
use crate::differential::{DeltaSequence, DiffRow};
use crate::error::{Error, Result};
use crate::feistel::{Block, EncryptionOracle};
use crate::quantum::CostLedger;

pub const DELTA_START_6R: usize = 3;

/// Classical 6-round attack: admissible `X'` have the top `n/4` bits of the
/// half-block zero, and the ciphertext right half `v₅` must not change.
pub fn run_attack_6round_classical(oracle: &EncryptionOracle, params: &AttackParams) -> Result<AttackReport> {
    let started = Instant::now();
    let public = oracle.public();
    if public.rounds() != 6 {
        return Err(Error::Precondition(format!("6-round attack on a {}-round cipher", public.rounds())));
    }
    let n = public.block_bits();
    check_block_size(n, 12)?;
    let h = public.half_bits();
    let free_bits = h / 2;
    let x = choose_x(params, h, free_bits)?;
    let queries_before = oracle.distinct_queries();

    let census = CharacteristicCensus::compute(public, x, free_bits)?;
    let structures = Structures::collect(oracle, x, 1 << (h / 2), params.seed)?;
    let structure_queries = oracle.distinct_queries() - queries_before;
    let work: Vec<Block> = structures.texts().iter().map(|t| t.1).collect();
    let pairs = structures.filter_pairs(
        &work,
        |w| (w.right as u64) << 32 | (w.left >> free_bits) as u64,
        |a, b| a.left ^ b.left != x,
    );
    let (delta, delta_auto) =
        resolve_delta(params, DELTA_START_6R, pairs.len() as u64, census.characteristics.len() as u64, h)?;
    // the quantum charges of the census are irrelevant to a classical attack
    let table = TableTdelta::build(public, &census, delta, params.seed, &mut CostLedger::default())?;

    let f0_row = DiffRow::new(public.table(0), x);
    let completer = KeyCompleter::new(public, structures.known_pairs(VALIDATION_PAIRS));
    let mut tpc = structures.plaintext_table();
    let mut trials = Trials::default();
    let mut found: Option<(Vec<u32>, MatchRecord)> = None;
    let mut scratch = CostLedger::default();

    'pairs: for (i, pair) in pairs.iter().enumerate() {
        for k0 in k0_candidates(&f0_row, pair, &mut scratch) {
            let seq = delta_sequence_6r(oracle, &mut tpc, pair, k0, delta);
            trials.g_evaluations += 1;
            for &idx in table.lookup(&seq) {
                let ch = &table.entries()[idx as usize].ch;
                if ch.x_prime != pair.output_difference().left {
                    continue;
                }
                if let Some(keys) = completer.complete(pair.p, k0, pair.w, ch, &[], &mut trials.completion_trials) {
                    let m = MatchRecord {
                        table_entry: idx as usize,
                        x_prime: ch.x_prime,
                        y: ch.y,
                        t2: ch.t2,
                        t3: ch.t3,
                        t4: ch.t4,
                        pair_index: i,
                        k0,
                        k6: None,
                    };
                    found = Some((keys, m));
                    break 'pairs;
                }
                trials.false_matches += 1;
            }
        }
    }

    let queries = oracle.distinct_queries() - queries_before;
    let ledger =
        CostLedger { classical_queries: queries, classical_memory: table.memory_cells(), ..CostLedger::default() };
    let sizes = Sizes {
        characteristic_keys: census.keys,
        populated_keys: census.populated_keys,
        table_entries: table.len() as u64,
        table_cells: table.memory_cells(),
        structures: structures.lefts().len() as u64,
        structure_queries,
        filtered_pairs: pairs.len() as u64,
        cross_pairs: structures.cross_pairs(),
        candidates: trials.g_evaluations,
        plaintext_table: tpc.len() as u64,
        delta_set_queries: queries - structure_queries,
        nominal_plaintext_table_log2: 3 * n / 4 + 1 + delta as u32,
    };
    let (recovered, matched) = found.map_or((None, None), |(k, m)| (Some(k), Some(m)));
    Ok(AttackReport {
        attack: AttackKind::SixRoundClassical,
        n,
        r: 6,
        seed: params.seed,
        x,
        delta,
        delta_auto,
        claw_mode: None,
        success: recovered.is_some(),
        recovered_subkeys: recovered,
        matched,
        trials,
        ledger,
        stages: StageLedgers { precompute: CostLedger::default(), online: ledger },
        sizes,
        outer: None,
        comparison: Vec::new(),
        notes: Vec::new(),
        wall_clock_ms: started.elapsed().as_millis() as u64,
    })
}

/// Δ-sequence of `v₅` (the ciphertext right half) over the δ-set of `P`.
fn delta_sequence_6r(
    oracle: &EncryptionOracle,
    tpc: &mut super::PlaintextTable,
    pair: &PairRecord,
    k0: u32,
    delta: usize,
) -> DeltaSequence {
    let set: Vec<Block> = delta_set(oracle.public(), pair.p, k0, delta).collect();
    DeltaSequence(
        set.into_iter()
            .map(|pj| {
                tpc.fetch(oracle, pj);
                tpc.get(pj).expect("just fetched").right ^ pair.w.right
            })
            .collect(),
    )
}
