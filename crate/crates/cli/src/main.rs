use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use nsw_cli::args::Cli;

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => nsw_cli::run(cli),
        Err(e) => {
            let _ = e.print();
            // Exit code 2 is reserved for lemma violations.
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            }
        }
    }
}
