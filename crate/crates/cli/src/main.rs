mod args;
mod commands;
mod error;

use args::{Cli, Command};
use clap::Parser;
use error::CliResult;
use std::process::ExitCode;

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    let (args, run): (args::RunArgs, fn(&args::RunArgs) -> CliResult<()>) = match cli.command {
        Command::Simulate(a) => (a, commands::simulate as _),
        Command::Register(a) => (a, commands::register as _),
        Command::Evaluate(a) => (a, commands::evaluate as _),
        Command::Reproduce(a) => (a, commands::reproduce as _),
    };
    let args = args.merged()?;
    args.validate_positive()?;
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| error::CliError::Validation(format!("--threads: {e}")))?;
    }
    run(&args)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}
