mod args;
mod commands;
mod document;
mod report;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command};
use document::{command_line, Provenance};

fn dispatch(cli: &Cli, prov: &Provenance) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a, prov),
        Command::Fit(a) => commands::fit(a, prov),
        Command::Gof(a) => commands::gof(a, prov),
        Command::Compare(a) => commands::compare(a, prov),
        Command::Scaling(a) => {
            let rows = commands::scaling(a, prov)?;
            print!("{}", report::scaling_table(&rows));
            Ok(())
        }
        Command::Simulate(a) => commands::simulate(a, prov),
        Command::Report(a) => {
            print!("{}", report::render_dir(&a.dir)?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let prov = Provenance {
        command: command_line(&args),
        seed: cli.seed,
    };
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()?
            .install(|| dispatch(&cli, &prov)),
        None => dispatch(&cli, &prov),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
