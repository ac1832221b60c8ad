use anyhow::{bail, Context, Result};
use qmitm_core::attack::{
    run_attack_6round_classical, run_attack_7round, run_attack_rround, AttackParams, AttackReport,
};
use qmitm_core::{Block, CipherSpec, EncryptionOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{AttackArgs, GenArgs};
use crate::Outcome;

/// Fresh blocks each recovered key must encrypt correctly.
pub const VERIFY_BLOCKS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackCommand {
    Six,
    Seven,
    R,
}

impl AttackCommand {
    fn name(self) -> &'static str {
        match self {
            AttackCommand::Six => "attack6",
            AttackCommand::Seven => "attack7",
            AttackCommand::R => "attackr",
        }
    }

    fn default_threshold(self) -> f64 {
        match self {
            AttackCommand::Six => 0.5,
            AttackCommand::Seven | AttackCommand::R => 0.4,
        }
    }

    fn check(self, spec: &CipherSpec) -> Result<()> {
        let r = spec.r();
        let ok = match self {
            AttackCommand::Six => r == 6,
            AttackCommand::Seven => r == 7,
            AttackCommand::R => r >= 8,
        };
        if !ok {
            bail!("{} cannot attack a {r}-round cipher", self.name());
        }
        Ok(())
    }

    fn run(self, oracle: &EncryptionOracle, params: &AttackParams) -> qmitm_core::Result<AttackReport> {
        match self {
            AttackCommand::Six => run_attack_6round_classical(oracle, params),
            AttackCommand::Seven => run_attack_7round(oracle, params),
            AttackCommand::R => run_attack_rround(oracle, params),
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<Outcome> {
    let spec = args.gen;
    let seed = spec.seed.context("gen needs an explicit seed: --gen n,r,seed")?;
    let cipher = CipherSpec::generate(spec.n, spec.r, seed)?;
    let text = cipher.to_descriptor(args.explicit).to_toml()?;
    Ok(Outcome { name: "cipher", ext: "toml", text, pass: true })
}

#[derive(Debug, Serialize)]
pub struct SeedRun {
    pub seed: u64,
    pub cipher_seed: u64,
    /// The recovered key encrypts [`VERIFY_BLOCKS`] fresh blocks correctly.
    pub verified: bool,
    pub report: AttackReport,
}

#[derive(Debug, Serialize)]
pub struct GridReport {
    pub command: &'static str,
    pub n: u32,
    pub r: usize,
    pub seeds: [u64; 2],
    pub threshold: f64,
    pub runs_total: usize,
    pub successes: usize,
    pub verified_successes: usize,
    pub pass: bool,
    pub runs: Vec<SeedRun>,
}

/// Whether `keys` agree with the secret subkeys' encryption on fresh random
/// blocks. Uses the secret directly, so the oracle's query count is untouched.
pub fn verify_keys(oracle: &EncryptionOracle, keys: &[u32], seed: u64) -> bool {
    let secret = oracle.secret();
    if keys.len() != secret.r() {
        return false;
    }
    let mask = secret.public().mask();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5645_5249_4659);
    (0..VERIFY_BLOCKS).all(|_| {
        let p = Block { left: rng.gen::<u32>() & mask, right: rng.gen::<u32>() & mask };
        secret.public().encrypt_with(keys, p) == secret.encrypt(p).expect("block within range")
    })
}

pub fn cmd_attack(which: AttackCommand, args: &AttackArgs) -> Result<Outcome> {
    let fixed = match (&args.source.cipher, args.source.gen) {
        (Some(path), _) => Some(CipherSpec::load(path).with_context(|| format!("loading {}", path.display()))?),
        (None, Some(g)) => match g.seed {
            Some(s) => Some(CipherSpec::generate(g.n, g.r, s)?),
            None => None,
        },
        (None, None) => bail!("one of --cipher or --gen is required"),
    };
    let cipher_for = |seed: u64| -> Result<CipherSpec> {
        match (&fixed, args.source.gen) {
            (Some(spec), _) => Ok(spec.clone()),
            (None, Some(g)) => Ok(CipherSpec::generate(g.n, g.r, seed)?),
            (None, None) => unreachable!(),
        }
    };
    let first = cipher_for(args.seeds.0.start)?;
    which.check(&first)?;
    let threshold = args.threshold.unwrap_or_else(|| which.default_threshold());
    if !(0.0..=1.0).contains(&threshold) {
        bail!("threshold {threshold} outside [0, 1]");
    }

    let seeds: Vec<u64> = args.seeds.0.clone().collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| -> Result<SeedRun> {
            let spec = cipher_for(seed)?;
            let cipher_seed = spec.seed();
            let oracle = EncryptionOracle::new(spec);
            let params = AttackParams {
                seed,
                x: args.x,
                delta: args.delta,
                claw_mode: args.claw_mode,
                subset_size: args.subset_size,
                claw_cap: args.cap,
            };
            let report =
                which.run(&oracle, &params).with_context(|| format!("{} failed on seed {seed}", which.name()))?;
            let verified = report.recovered_subkeys.as_deref().is_some_and(|k| verify_keys(&oracle, k, seed));
            Ok(SeedRun { seed, cipher_seed, verified, report })
        })
        .collect::<Result<Vec<_>>>()?;

    let successes = runs.iter().filter(|r| r.report.success).count();
    let verified_successes = runs.iter().filter(|r| r.verified).count();
    let needed = (threshold * runs.len() as f64 - 1e-9).ceil() as usize;
    let report = GridReport {
        command: which.name(),
        n: first.n(),
        r: first.r(),
        seeds: [args.seeds.0.start, args.seeds.0.end],
        threshold,
        runs_total: runs.len(),
        successes,
        verified_successes,
        pass: verified_successes >= needed,
        runs,
    };
    Outcome::json(which.name(), &report, report.pass)
}
