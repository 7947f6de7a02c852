use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod report;

use args::{Cli, Command};
use report::Output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lagfactor::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("writing report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global()?;
    }
    let mut out = Output::resolve(cli.out.as_deref())?;
    let summary = match &cli.command {
        Command::Sim(a) => commands::sim(a, &mut out)?,
        Command::Generate(a) => commands::generate_data(a, &mut out)?,
        Command::Fit(a) => commands::fit(a, &mut out)?,
        Command::Rankscan(a) => commands::rankscan(a, &mut out)?,
        Command::Rrqr(a) => commands::rrqr(a, &mut out)?,
        Command::Roll(a) => commands::roll(a, &mut out)?,
    };
    println!("{summary}");
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help/--version
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
