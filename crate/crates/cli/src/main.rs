use std::process::ExitCode;

use clap::Parser;
use kirchpore_cli::{commands, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(o) => {
            commands::print_lines(&o);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
