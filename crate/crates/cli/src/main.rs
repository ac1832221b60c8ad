use std::process::ExitCode;

use clap::Parser;
use qmitm_cli::{report_path, run, write_report, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match report_path(cli.out.as_deref(), cli.out_dir.as_deref(), &outcome) {
        Some(path) => {
            if let Err(e) = write_report(&path, &outcome.text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
        None => print!("{}", outcome.text),
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
