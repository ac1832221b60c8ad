use std::ops::Range;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use qmitm_core::ClawMode;

use crate::OUT_DIR_ENV;

#[derive(Debug, Parser)]
#[command(name = "qmitm", version, about = "Quantum meet-in-the-middle workbench for reduced Feistel ciphers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory for outputs when --out is not given.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a cipher descriptor.
    Gen(GenArgs),
    /// Classical 6-round attack over a seed grid.
    Attack6(AttackArgs),
    /// Emulated quantum 7-round attack over a seed grid.
    Attack7(AttackArgs),
    /// Emulated quantum r-round attack (r >= 8) over a seed grid.
    Attackr(AttackArgs),
    /// Check the Grover, claw-finding and ledger emulation.
    ValidateQuantum(ValidateArgs),
    /// Fit cost exponents of the 7-round attack across block sizes.
    Scaling(ScalingArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Cipher parameters as n,r,seed.
    #[arg(long, value_name = "N,R,SEED")]
    pub gen: GenSpec,

    /// Store the round-function tables and subkeys instead of only the seed.
    #[arg(long)]
    pub explicit: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "cipher_source")]
pub struct CipherSource {
    /// Cipher descriptor file; every seed attacks this cipher.
    #[arg(long, group = "cipher_source")]
    pub cipher: Option<PathBuf>,

    /// Generate ciphers as n,r[,seed]. Without a seed, each grid seed
    /// generates its own cipher.
    #[arg(long, value_name = "N,R[,SEED]", group = "cipher_source")]
    pub gen: Option<GenSpec>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub source: CipherSource,

    /// Seed range a..b (exclusive) or a single seed.
    #[arg(long, default_value = "0..1")]
    pub seeds: SeedRange,

    /// Input difference X (hex with 0x, or decimal).
    #[arg(long, value_parser = parse_u32)]
    pub x: Option<u32>,

    /// Δ-sequence length; auto-selected when absent.
    #[arg(long)]
    pub delta: Option<usize>,

    #[arg(long, default_value = "faithful")]
    pub claw_mode: ClawMode,

    /// Claw subset size l.
    #[arg(long = "l")]
    pub subset_size: Option<usize>,

    /// Sampling-round cap for faithful claw finding.
    #[arg(long)]
    pub cap: Option<u64>,

    /// Required success fraction; defaults to 0.5 for attack6 and 0.4 otherwise.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Block sizes to measure.
    #[arg(long, value_delimiter = ',', default_value = "12,18")]
    pub sizes: Vec<u32>,

    #[arg(long, default_value = "0..2")]
    pub seeds: SeedRange,

    #[arg(long, default_value = "faithful")]
    pub claw_mode: ClawMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub n: u32,
    pub r: usize,
    pub seed: Option<u64>,
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || format!("expected n,r or n,r,seed, got {s:?}");
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let n = parts[0].parse().map_err(|_| bad())?;
        let r = parts[1].parse().map_err(|_| bad())?;
        let seed = parts.get(2).map(|p| p.parse()).transpose().map_err(|_| bad())?;
        Ok(Self { n, r, seed })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedRange(pub Range<u64>);

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected a..b or a single seed, got {s:?}");
        let range = match s.split_once("..") {
            Some((a, b)) => a.trim().parse().map_err(|_| bad())?..b.trim().parse().map_err(|_| bad())?,
            None => {
                let a: u64 = s.trim().parse().map_err(|_| bad())?;
                a..a + 1
            }
        };
        if range.is_empty() {
            return Err(format!("seed range {s:?} is empty"));
        }
        Ok(Self(range))
    }
}

fn parse_u32(s: &str) -> Result<u32, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("{s:?}: {e}"))
}
