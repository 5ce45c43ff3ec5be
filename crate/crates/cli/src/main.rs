use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use orbitcount_cli::experiments::run;
use orbitcount_cli::{Invocation, Subcommand, THREADS_ENV};

/// Orbit counting experiments for curve systems on hyperbolic surfaces.
#[derive(Debug, Parser)]
#[command(name = "orbitcount", version)]
struct Args {
    #[arg(value_enum)]
    command: Subcommand,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Checkpoint to continue an orbit search from.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Numeric tolerance for holonomy self-checks.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let inv = Invocation {
        command: args.command,
        config: args.config,
        resume: args.resume,
        threads: args.threads,
        tolerance: args.tolerance,
    };
    match run(&inv) {
        Ok(outcome) => {
            // a closed pipe on stdout is not a failure of the run
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", outcome.summary.trim_end_matches('\n'));
            for a in &outcome.artifacts {
                let _ = writeln!(out, "wrote {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("orbitcount: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
