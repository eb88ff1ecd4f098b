use std::process::ExitCode;

use clap::Parser;
use peerflow::cli::{execute, Cli};

fn main() -> ExitCode {
    execute(Cli::parse())
}
