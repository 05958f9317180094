//! `report`: CSV and SVG fitness summaries of a run directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use quadforge::error::{Error, Result};
use quadforge::evo::{load_history, write_csv_report, write_fitness_svg};

#[derive(Args)]
pub struct ReportArgs {
    /// Run directory written by `evolve`.
    #[arg(long)]
    pub run: PathBuf,
}

pub fn run(args: ReportArgs) -> Result<ExitCode> {
    let history = load_history(&args.run)?;
    if history.is_empty() {
        return Err(Error::Config(format!(
            "no generation records in {}",
            args.run.display()
        )));
    }
    let csv = args.run.join("history.csv");
    let svg = args.run.join("fitness.svg");
    write_csv_report(&history, &csv)?;
    write_fitness_svg(&history, &svg)?;
    println!(
        "{} generations -> {} and {}",
        history.len(),
        csv.display(),
        svg.display()
    );
    super::ok()
}
