use std::time::Instant;

use super::inner::{f6_rows, inner_attack, InnerSetup};
use super::keys::{delta_set, k0_candidates, KeyCompleter};
use super::pairs::{PairTable, PlaintextTable, Structures};
use super::report::{AttackKind, AttackReport, Sizes, StageLedgers};
use super::table::{CharacteristicCensus, TableTdelta};
use super::{check_block_size, choose_x, resolve_delta, AttackParams, VALIDATION_PAIRS};
use crate::cost::{compare, predicted_costs};
use crate::differential::DiffRow;
use crate::error::{Error, Result};
use crate::feistel::{Block, EncryptionOracle, RoundFunctions};
use crate::quantum::CostLedger;

/// First δ tried by the auto rule for attacks of seven or more rounds.
pub const DELTA_START: usize = 4;

/// Builds `T_δ` over the admissible `X'` (top `n/6` bits of the half-block
/// zero) for input difference `x`.
pub fn precompute_tdelta(
    public: &RoundFunctions,
    x: u32,
    delta: usize,
    seed: u64,
    ledger: &mut CostLedger,
) -> Result<TableTdelta> {
    let census = CharacteristicCensus::compute(public, x, free_bits_7r(public.half_bits()))?;
    TableTdelta::build(public, &census, delta, seed, ledger)
}

pub(crate) fn free_bits_7r(half_bits: u32) -> u32 {
    half_bits - half_bits / 3
}

/// Queries `2^{n/6}` structures and keeps the cross pairs whose ciphertexts
/// differ by an admissible `X'` in the right half.
pub fn collect_pairs_7r(oracle: &EncryptionOracle, x: u32, seed: u64) -> Result<(Structures, PairTable)> {
    let public = oracle.public();
    let h = public.half_bits();
    let structures = Structures::collect(oracle, x, 1 << (h / 3), seed)?;
    let work: Vec<Block> = structures.texts().iter().map(|t| t.1).collect();
    let records = filter_7r(&structures, &work, free_bits_7r(h), x);
    Ok((structures, PairTable { half_bits: h, rounds: public.rounds(), x, seed, records }))
}

pub(crate) fn filter_7r(structures: &Structures, work: &[Block], free_bits: u32, x: u32) -> Vec<super::PairRecord> {
    structures.filter_pairs(work, |w| (w.right >> free_bits) as u64, |a, b| a.right ^ b.right != x)
}

/// Adds every δ-set plaintext needed by the pairs to `tpc`, querying the
/// oracle for unknown ones. Returns the number of fresh queries.
pub(crate) fn serve_delta_sets<'a>(
    oracle: &EncryptionOracle,
    tpc: &mut PlaintextTable,
    f0_row: &DiffRow,
    pairs: impl IntoIterator<Item = &'a super::PairRecord>,
    delta: usize,
) -> u64 {
    let public = oracle.public();
    let mut scratch = CostLedger::default();
    let mut fresh = 0;
    for pair in pairs {
        for k0 in k0_candidates(f0_row, pair, &mut scratch) {
            for pj in delta_set(public, pair.p, k0, delta) {
                fresh += u64::from(tpc.fetch(oracle, pj));
            }
        }
    }
    fresh
}

pub fn run_attack_7round(oracle: &EncryptionOracle, params: &AttackParams) -> Result<AttackReport> {
    check_7r(oracle)?;
    let h = oracle.public().half_bits();
    let x = choose_x(params, h, free_bits_7r(h))?;
    let structures = Structures::collect(oracle, x, 1 << (h / 3), params.seed)?;
    run_attack_7round_on(oracle, params, structures)
}

fn check_7r(oracle: &EncryptionOracle) -> Result<()> {
    let public = oracle.public();
    if public.rounds() != 7 {
        return Err(Error::Precondition(format!("7-round attack on a {}-round cipher", public.rounds())));
    }
    check_block_size(public.block_bits(), 6)
}

/// The 7-round attack on structures chosen by the caller (already queried).
/// Its input difference overrides `params.x`.
pub fn run_attack_7round_on(
    oracle: &EncryptionOracle,
    params: &AttackParams,
    structures: Structures,
) -> Result<AttackReport> {
    let started = Instant::now();
    check_7r(oracle)?;
    let public = oracle.public();
    let h = public.half_bits();
    let free_bits = free_bits_7r(h);
    let x = structures.x();

    let census = CharacteristicCensus::compute(public, x, free_bits)?;
    let work: Vec<Block> = structures.texts().iter().map(|t| t.1).collect();
    let pairs = PairTable {
        half_bits: h,
        rounds: 7,
        x,
        seed: params.seed,
        records: filter_7r(&structures, &work, free_bits, x),
    };
    let structure_queries = structures.len() as u64;
    let (delta, delta_auto) =
        resolve_delta(params, DELTA_START, pairs.len() as u64, census.characteristics.len() as u64, h)?;

    let mut pre = CostLedger::default();
    let table = TableTdelta::build(public, &census, delta, params.seed, &mut pre)?;

    let f0_row = DiffRow::new(public.table(0), x);
    let mut tpc = structures.plaintext_table();
    let delta_set_queries = serve_delta_sets(oracle, &mut tpc, &f0_row, &pairs.records, delta);

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
    let inner = inner_attack(&setup, &pairs.records, &[], params.seed)?;

    let mut online = inner.ledger;
    online.classical_queries = structure_queries + delta_set_queries;
    online.raise_memory(table.memory_cells());
    let ledger = pre.merge(&online);

    let n = public.block_bits();
    let sizes = Sizes {
        characteristic_keys: census.keys,
        populated_keys: census.populated_keys,
        table_entries: table.len() as u64,
        table_cells: table.memory_cells(),
        structures: structures.lefts().len() as u64,
        structure_queries,
        filtered_pairs: pairs.len() as u64,
        cross_pairs: structures.cross_pairs(),
        candidates: inner.candidates,
        plaintext_table: tpc.len() as u64,
        delta_set_queries,
        nominal_plaintext_table_log2: 2 * n / 3 + 1 + delta as u32,
    };
    let notes = vec![format!(
        "classical_memory counts T_delta cells only; the pair table holds {} records and T'_PC {} plaintexts",
        pairs.len(),
        tpc.len()
    )];
    Ok(AttackReport {
        attack: AttackKind::SevenRound,
        n,
        r: 7,
        seed: params.seed,
        x,
        delta,
        delta_auto,
        claw_mode: Some(params.claw_mode),
        success: inner.keys.is_some(),
        recovered_subkeys: inner.keys,
        matched: inner.matched,
        trials: inner.trials,
        ledger,
        stages: StageLedgers { precompute: pre, online },
        sizes,
        outer: None,
        comparison: compare(&predicted_costs(7)?, n, &ledger),
        notes,
        wall_clock_ms: started.elapsed().as_millis() as u64,
    })
}
