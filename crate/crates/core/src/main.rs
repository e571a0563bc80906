use std::process::ExitCode;

use clap::Parser;
use qobs::cli::{io::to_text, run, Cli, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ChecksFailed) => ExitCode::from(1),
        Err(diagnostic) => {
            eprintln!("{}", to_text(&diagnostic, true));
            ExitCode::from(2)
        }
    }
}
