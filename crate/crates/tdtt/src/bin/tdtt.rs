use std::process::ExitCode;

use clap::Parser;
use tdtt::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli, &mut std::io::stdout().lock()).map_err(anyhow::Error::from);
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("tdtt: {e:#}");
            ExitCode::from(2)
        }
    }
}
