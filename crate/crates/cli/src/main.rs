//! `situ`: generate synthetic traces, build graph models, detect groups and
//! approaching pairs, run relational operators and compare results.
//!
//! Exit status: 0 on success, 1 on invalid input or flags, 2 on I/O
//! failure. Errors are written to standard error as
//! `situ: error[<code>]: <message>`.

mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use situ_core::Error;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = e.print();
                    eprintln!("situ: error[usage]: invalid command line");
                    ExitCode::from(1)
                }
            };
        }
    };
    let threads = cli.threads.map(|t| t as usize);
    let result = match cli.command {
        Command::GenTrace(a) => commands::gen_trace(&a),
        Command::BuildGraphs(a) => commands::build_graphs(&a),
        Command::DetectGroups(a) => commands::detect_groups(&a, threads),
        Command::DetectApproach(a) => commands::detect_approach(&a, threads),
        Command::Rpp(a) => commands::rpp(&a),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("situ: error[{}]: {e}", e.code());
    ExitCode::from(if e.is_io() { 2 } else { 1 })
}
