use std::process::ExitCode;

use clap::Parser;

use berger_cgc_cli::config::{resolve, Cli};
use berger_cgc_cli::{exit_code, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli.command, &cli.opts).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
