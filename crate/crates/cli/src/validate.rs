use anyhow::Result;
use qmitm_core::quantum::{claw_find, grover_statevector, ClawInstance};
use qmitm_core::{ClawMode, CostLedger};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::ValidateArgs;
use crate::Outcome;

pub const STATEVECTOR_TOLERANCE: f64 = 1e-9;
pub const PLANTED_INSTANCES: usize = 100;
pub const EMPTY_INSTANCES: usize = 50;
pub const LEDGER_TRIPLES: usize = 1000;

#[derive(Debug, Serialize)]
pub struct StatevectorSweep {
    pub cases: u64,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ClawSuite {
    pub planted: usize,
    pub found_faithful: usize,
    pub found_oracle: usize,
    pub no_claw_instances: usize,
    /// No-claw instances where both modes reported no claw.
    pub no_claw_reported: usize,
    /// Every returned claw satisfies `f(x) = g(y)`.
    pub claws_valid: bool,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct LedgerSuite {
    pub triples: usize,
    pub associative: bool,
    pub commutative: bool,
    pub identity: bool,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ValidateReport {
    pub seed: u64,
    pub statevector: StatevectorSweep,
    pub claws: ClawSuite,
    pub ledger_merge: LedgerSuite,
    pub pass: bool,
}

/// `sin²((2k+1)·arcsin√(M/N))`.
pub fn grover_closed_form(domain: usize, marked: usize, k: u64) -> f64 {
    let theta = (marked as f64 / domain as f64).sqrt().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

pub fn statevector_sweep() -> Result<StatevectorSweep> {
    let mut cases = 0;
    let mut max_deviation = 0f64;
    for bits in 0..=10 {
        let domain = 1usize << bits;
        for marked in 1..=domain.min(8) {
            let set: Vec<usize> = (0..marked).collect();
            for k in 0..=200 {
                let p = grover_statevector(domain, &set, k)?;
                max_deviation = max_deviation.max((p - grover_closed_form(domain, marked, k)).abs());
                cases += 1;
            }
        }
    }
    Ok(StatevectorSweep { cases, max_deviation, pass: max_deviation < STATEVECTOR_TOLERANCE })
}

/// Random claw instance with `f` injective onto even values and `g` onto odd
/// values, except for one planted claw when `plant` is set.
fn instance(rng: &mut ChaCha8Rng, plant: bool) -> (Vec<u32>, Vec<u32>, Option<(usize, usize)>) {
    let n = rng.gen_range(1..=1024usize);
    let m = rng.gen_range(1..=1024usize);
    let mut f: Vec<u32> = (0..n as u32).map(|v| 2 * v).collect();
    let mut g: Vec<u32> = (0..m as u32).map(|v| 2 * v + 1).collect();
    f.shuffle(rng);
    g.shuffle(rng);
    let planted = plant.then(|| {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..m));
        g[y] = f[x];
        (x, y)
    });
    (f, g, planted)
}

pub fn claw_suite(seed: u64) -> Result<ClawSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x434c4157);
    let mut suite = ClawSuite {
        planted: PLANTED_INSTANCES,
        found_faithful: 0,
        found_oracle: 0,
        no_claw_instances: EMPTY_INSTANCES,
        no_claw_reported: 0,
        claws_valid: true,
        pass: false,
    };
    for i in 0..PLANTED_INSTANCES + EMPTY_INSTANCES {
        let plant = i < PLANTED_INSTANCES;
        let (f, g, planted) = instance(&mut rng, plant);
        let inst = ClawInstance::new(f.len(), g.len(), |x: usize| Some(f[x]), |y: usize| Some(g[y]));
        let mut none_reported = true;
        for mode in [ClawMode::Faithful, ClawMode::Oracle] {
            let out = claw_find(&inst, rng.gen(), mode, None, &mut CostLedger::default())?;
            if let Some(c) = out.claw {
                none_reported = false;
                suite.claws_valid &= f[c.x] == g[c.y] && planted == Some((c.x, c.y));
                if plant {
                    match mode {
                        ClawMode::Faithful => suite.found_faithful += 1,
                        ClawMode::Oracle => suite.found_oracle += 1,
                    }
                }
            }
        }
        if !plant && none_reported {
            suite.no_claw_reported += 1;
        }
    }
    suite.pass = suite.claws_valid
        && suite.found_faithful == PLANTED_INSTANCES
        && suite.found_oracle == PLANTED_INSTANCES
        && suite.no_claw_reported == EMPTY_INSTANCES;
    Ok(suite)
}

fn random_ledger(rng: &mut ChaCha8Rng) -> CostLedger {
    CostLedger {
        modeled_quantum_time: rng.gen_range(0..1 << 40),
        parallel_width: rng.gen_range(0..1 << 20),
        qubit_count: rng.gen_range(0..1 << 20),
        qram_lookups: rng.gen_range(0..1 << 40),
        classical_queries: rng.gen_range(0..1 << 40),
        classical_memory: rng.gen_range(0..1 << 30),
    }
}

pub fn ledger_suite(seed: u64) -> LedgerSuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4c4544474552);
    let (mut associative, mut commutative, mut identity) = (true, true, true);
    for _ in 0..LEDGER_TRIPLES {
        let (a, b, c) = (random_ledger(&mut rng), random_ledger(&mut rng), random_ledger(&mut rng));
        associative &= a.merge(&b).merge(&c) == a.merge(&b.merge(&c));
        commutative &= a.merge(&b) == b.merge(&a);
        identity &= a.merge(&CostLedger::default()) == a;
    }
    LedgerSuite {
        triples: LEDGER_TRIPLES,
        associative,
        commutative,
        identity,
        pass: associative && commutative && identity,
    }
}

pub fn cmd_validate_quantum(args: &ValidateArgs) -> Result<Outcome> {
    let statevector = statevector_sweep()?;
    let claws = claw_suite(args.seed)?;
    let ledger_merge = ledger_suite(args.seed);
    let pass = statevector.pass && claws.pass && ledger_merge.pass;
    let report = ValidateReport { seed: args.seed, statevector, claws, ledger_merge, pass };
    Outcome::json("validate-quantum", &report, pass)
}
