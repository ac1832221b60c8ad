use anyhow::{bail, Result};
use qmitm_core::attack::{run_attack_7round, AttackParams};
use qmitm_core::cost::{predicted_costs, scaling_check, ScalingReport};
use qmitm_core::{CipherSpec, CostLedger, EncryptionOracle};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::ScalingArgs;
use crate::Outcome;

#[derive(Debug, Serialize)]
pub struct ScalingRun {
    pub n: u32,
    pub seed: u64,
    pub delta: usize,
    pub success: bool,
    pub ledger: CostLedger,
}

#[derive(Debug, Serialize)]
pub struct ScalingOutput {
    pub rounds: usize,
    pub runs: Vec<ScalingRun>,
    pub fit: ScalingReport,
    pub pass: bool,
}

/// Runs the 7-round attack at every `(n, seed)` and fits each resource's
/// `log₂` against `n`.
pub fn cmd_scaling(args: &ScalingArgs) -> Result<Outcome> {
    if args.sizes.is_empty() {
        bail!("--sizes is empty");
    }
    let grid: Vec<(u32, u64)> = args.sizes.iter().flat_map(|&n| args.seeds.0.clone().map(move |s| (n, s))).collect();
    let runs = grid
        .par_iter()
        .map(|&(n, seed)| -> Result<ScalingRun> {
            let oracle = EncryptionOracle::new(CipherSpec::generate(n, 7, seed)?);
            let params = AttackParams { claw_mode: args.claw_mode, ..AttackParams::with_seed(seed) };
            let report = run_attack_7round(&oracle, &params)?;
            Ok(ScalingRun { n, seed, delta: report.delta, success: report.success, ledger: report.ledger })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(u32, CostLedger)> = runs.iter().map(|r| (r.n, r.ledger)).collect();
    let fit = scaling_check(&predicted_costs(7)?, &points)?;
    let pass = fit.pass;
    Outcome::json("scaling", &ScalingOutput { rounds: 7, runs, fit, pass }, pass)
}
