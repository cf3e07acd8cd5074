use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use dioph_cli::{exit, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code() as u8);
        }
    };
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &outcome.output).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(outcome.output.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(exit::PARSE_IO as u8);
    }
    ExitCode::from(outcome.code as u8)
}
