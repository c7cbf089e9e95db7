use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use incompat_cli::{dispatch, exit_code, report, Cli, RunConfig};

fn run() -> anyhow::Result<()> {
    let config = RunConfig::from_cli(Cli::parse())?;
    let result = dispatch(&config)?;
    let text = serde_json::to_string_pretty(&report(&config, result)?)?;
    if let Some(path) = &config.common.out {
        std::fs::write(path, &text)?;
    }
    match writeln!(std::io::stdout(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
