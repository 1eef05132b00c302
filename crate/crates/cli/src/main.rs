//! `kummer`: batch analyses, verifications, solves and ray-trace checks.
//!
//! Progress goes to standard error; artifacts go to the output directory.
//! Exit status is 0 when every check passes, 1 when a check or computation
//! fails and 2 for invalid input.

mod analyze;
mod common;
mod convergence;
mod raytrace;
mod solve;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "kummer", version, about = "Reflector intensity analysis and the prescribed mean intensity problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Intensity form, principal intensities, S_m and striction tables of one reflector.
    Analyze(analyze::Args),
    /// Run the built-in check suites.
    Verify(verify::Args),
    /// Solve S_1 = n g(x, ρ) by continuation from a problem file.
    Solve(solve::Args),
    /// Trace rays and compare the far-field histogram with its oracle.
    Raytrace(raytrace::Args),
    /// Observed orders under grid or step refinement.
    Convergence(convergence::Args),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => analyze::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Solve(a) => solve::run(a),
        Command::Raytrace(a) => raytrace::run(a),
        Command::Convergence(a) => convergence::run(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
