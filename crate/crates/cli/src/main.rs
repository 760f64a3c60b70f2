use std::process::ExitCode;

use clap::Parser;
use sqlab::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match sqlab::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sqlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
