mod cli;
mod commands;
mod error;
mod schemas;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = bell_lab::format::to_json(&e.to_json(), !cli.compact)
                .unwrap_or_else(|_| e.to_string());
            eprintln!("{body}");
            ExitCode::from(e.kind().exit_code())
        }
    }
}
