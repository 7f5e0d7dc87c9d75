use std::process::ExitCode;

use clap::Parser;
use panokit_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            if !out.is_empty() {
                println!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", panokit_cli::error_line(&e));
            ExitCode::FAILURE
        }
    }
}
