use std::time::Instant;

use super::inner::{f6_rows, inner_attack, InnerSetup};
use super::keys::KeyCompleter;
use super::report::{AttackKind, AttackReport, OuterSearch, Sizes, StageLedgers, Trials};
use super::seven::{filter_7r, free_bits_7r, serve_delta_sets, DELTA_START};
use super::table::{CharacteristicCensus, TableTdelta};
use super::{check_block_size, choose_x, resolve_delta, AttackParams, PairRecord, Structures, VALIDATION_PAIRS};
use crate::cost::{compare, predicted_costs};
use crate::differential::DiffRow;
use crate::error::{Error, Result};
use crate::feistel::{Block, EncryptionOracle};
use crate::quantum::CostLedger;

/// Largest outer key space emulated exhaustively.
pub const MAX_OUTER_BITS: u32 = 24;

/// Keys of rounds `7..r` packed little-endian, `h` bits per round.
pub fn unpack_outer_key(k: u64, words: usize, half_bits: u32) -> Vec<u32> {
    let mask = (1u64 << half_bits) - 1;
    (0..words).map(|i| ((k >> (i as u32 * half_bits)) & mask) as u32).collect()
}

/// The 7-round attack under an outer Grover search over the last `r - 7`
/// subkeys. Every outer key is evaluated; the outer search is charged
/// `⌈(π/4)·√(2^{(r-7)n/2})⌉` iterations of the superposed inner search.
pub fn run_attack_rround(oracle: &EncryptionOracle, params: &AttackParams) -> Result<AttackReport> {
    let started = Instant::now();
    let public = oracle.public();
    let r = public.rounds();
    if r < 8 {
        return Err(Error::Precondition(format!("r-round attack needs r >= 8, got {r}")));
    }
    let n = public.block_bits();
    check_block_size(n, 6)?;
    let h = public.half_bits();
    let words = r - 7;
    let key_bits = words as u32 * h;
    if key_bits > MAX_OUTER_BITS {
        return Err(Error::Precondition(format!("{key_bits} outer key bits exceed {MAX_OUTER_BITS}")));
    }
    let free_bits = free_bits_7r(h);
    let x = choose_x(params, h, free_bits)?;
    let queries_before = oracle.distinct_queries();

    let census = CharacteristicCensus::compute(public, x, free_bits)?;
    let structures = Structures::collect(oracle, x, 1 << (h / 3), params.seed)?;
    let structure_queries = oracle.distinct_queries() - queries_before;
    // every cross pair may survive under some outer key
    let all_pairs: Vec<PairRecord> =
        structures.filter_pairs(&structures.texts().iter().map(|t| t.1).collect::<Vec<_>>(), |_| 0, |_, _| true);
    let expected_pairs = structures.cross_pairs() >> (h - free_bits);
    let (delta, delta_auto) =
        resolve_delta(params, DELTA_START, expected_pairs, census.characteristics.len() as u64, h)?;
    let mut pre = CostLedger::default();
    let table = TableTdelta::build(public, &census, delta, params.seed, &mut pre)?;

    let f0_row = DiffRow::new(public.table(0), x);
    let mut tpc = structures.plaintext_table();
    let delta_set_queries = serve_delta_sets(oracle, &mut tpc, &f0_row, &all_pairs, delta);
    drop(all_pairs);

    let completer = KeyCompleter::new(public, structures.known_pairs(VALIDATION_PAIRS));
    let rows6 = f6_rows(public, free_bits);
    let setup = InnerSetup {
        public,
        table: &table,
        tpc: &tpc,
        completer: &completer,
        f0_row: &f0_row,
        f6_rows: &rows6,
        params,
    };

    let mut inner_ledgers = Vec::with_capacity(1 << key_bits);
    let mut marked = Vec::new();
    let mut trials = Trials::default();
    let mut recovered = None;
    let mut filtered_pairs = 0u64;
    let mut candidates = 0u64;
    for k in 0..1u64 << key_bits {
        let outer = unpack_outer_key(k, words, h);
        let work: Vec<Block> = structures.texts().iter().map(|t| public.undo_rounds(t.1, &outer)).collect();
        let pairs = filter_7r(&structures, &work, free_bits, x);
        let seed = params.seed ^ k.wrapping_mul(0xd1b5_4a32_d192_ed03);
        let out = inner_attack(&setup, &pairs, &outer, seed)?;
        inner_ledgers.push(out.ledger);
        trials.claw_attempts += out.trials.claw_attempts;
        trials.false_matches += out.trials.false_matches;
        trials.sampling_rounds += out.trials.sampling_rounds;
        trials.modeled_claw_rounds += out.trials.modeled_claw_rounds;
        trials.subset_size = trials.subset_size.max(out.trials.subset_size);
        trials.g_evaluations += out.trials.g_evaluations;
        trials.completion_trials += out.trials.completion_trials;
        if out.claw_found {
            marked.push(k);
        }
        if recovered.is_none() {
            if let Some(keys) = out.keys {
                recovered = Some((k, keys, out.matched));
                filtered_pairs = pairs.len() as u64;
                candidates = out.candidates;
            }
        }
        if recovered.is_none() {
            filtered_pairs = filtered_pairs.max(pairs.len() as u64);
            candidates = candidates.max(out.candidates);
        }
    }

    let inner = CostLedger::join_superposed(&inner_ledgers);
    let iterations = (std::f64::consts::FRAC_PI_4 * ((1u64 << key_bits) as f64).sqrt()).ceil() as u64;
    let mut online = CostLedger {
        modeled_quantum_time: iterations * inner.modeled_quantum_time,
        qram_lookups: iterations * inner.qram_lookups,
        ..CostLedger::default()
    };
    online.classical_queries = oracle.distinct_queries() - queries_before;
    online.raise_memory(table.memory_cells());
    let ledger = pre.merge(&online);

    let sizes = Sizes {
        characteristic_keys: census.keys,
        populated_keys: census.populated_keys,
        table_entries: table.len() as u64,
        table_cells: table.memory_cells(),
        structures: structures.lefts().len() as u64,
        structure_queries,
        filtered_pairs,
        cross_pairs: structures.cross_pairs(),
        candidates,
        plaintext_table: tpc.len() as u64,
        delta_set_queries,
        nominal_plaintext_table_log2: 2 * n / 3 + 1 + delta as u32,
    };
    let notes = vec![format!(
        "all {} cross pairs are kept unfiltered; each outer key filters them after partial decryption",
        structures.cross_pairs()
    )];
    let (validated, keys, matched) = match recovered {
        Some((k, keys, m)) => (Some(k), Some(keys), m),
        None => (None, None, None),
    };
    Ok(AttackReport {
        attack: AttackKind::RRound,
        n,
        r,
        seed: params.seed,
        x,
        delta,
        delta_auto,
        claw_mode: Some(params.claw_mode),
        success: keys.is_some(),
        recovered_subkeys: keys,
        matched,
        trials,
        ledger,
        stages: StageLedgers { precompute: pre, online },
        sizes,
        outer: Some(OuterSearch { key_bits, iterations, marked_keys: marked, validated_key: validated, inner }),
        comparison: compare(&predicted_costs(r)?, n, &ledger),
        notes,
        wall_clock_ms: started.elapsed().as_millis() as u64,
    })
}
