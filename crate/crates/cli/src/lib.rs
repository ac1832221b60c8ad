//! Command-line driver for the qmitm workbench: cipher generation, seeded
//! attack grids, quantum-emulation self-checks and scaling fits.

pub mod args;
pub mod grid;
pub mod scaling;
pub mod validate;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub use args::{Cli, Command};

/// Environment variable naming the default directory for reports.
pub const OUT_DIR_ENV: &str = "QMITM_OUT_DIR";

/// Result of one command: the report text and whether every threshold held.
#[derive(Debug)]
pub struct Outcome {
    pub name: &'static str,
    /// File extension used when the output goes to the default directory.
    pub ext: &'static str,
    pub text: String,
    pub pass: bool,
}

impl Outcome {
    pub fn json<T: Serialize>(name: &'static str, report: &T, pass: bool) -> Result<Self> {
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        Ok(Self { name, ext: "json", text, pass })
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen(a) => grid::cmd_gen(a),
        Command::Attack6(a) => grid::cmd_attack(grid::AttackCommand::Six, a),
        Command::Attack7(a) => grid::cmd_attack(grid::AttackCommand::Seven, a),
        Command::Attackr(a) => grid::cmd_attack(grid::AttackCommand::R, a),
        Command::ValidateQuantum(a) => validate::cmd_validate_quantum(a),
        Command::Scaling(a) => scaling::cmd_scaling(a),
    }
}

/// Where an output goes: `--out`, else `$QMITM_OUT_DIR/<name>.<ext>`, else
/// standard output (`None`).
pub fn report_path(out: Option<&Path>, out_dir: Option<&Path>, outcome: &Outcome) -> Option<PathBuf> {
    out.map(Path::to_path_buf).or_else(|| out_dir.map(|d| d.join(format!("{}.{}", outcome.name, outcome.ext))))
}

pub fn write_report(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
