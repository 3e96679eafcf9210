mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::CliError;

fn write_out(path: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (text, out) = match &cli.command {
        Command::Spectrum(a) => (commands::spectrum(a)?, &a.common.out),
        Command::Classify(a) => (commands::classify(a)?, &a.common.out),
        Command::Curves(a) => (commands::curves(a)?, &a.common.out),
        Command::Evolve(a) => {
            let r = commands::evolve_cmd(a)?;
            if let Some(p) = &a.summary {
                write_out(Some(p), &r.summary)?;
            }
            (r.main, &a.common.out)
        }
    };
    write_out(out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
