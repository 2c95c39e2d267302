use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use mirrorrad_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(bytes) => match std::io::stdout().write_all(&bytes) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("mirrorrad: {e}");
                ExitCode::from(3)
            }
        },
        Err(e) => {
            eprintln!("mirrorrad: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
