//! `ejulia`: build schedules, verify them, render, and estimate dimensions.

mod args;
mod config;
mod run;

use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let inv = match config::parse_with_config(&argv) {
        Ok(inv) => inv,
        Err(e) => e.exit(),
    };
    let threads = inv.cli.global.threads;
    match entire_julia::exec::with_threads(threads, || run::run(&inv)) {
        Ok(code) => code,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
