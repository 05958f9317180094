//! Pipeline command line: ingest candidate meshes, process them into
//! robot banks, evolve morphologies, export winners, and report runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quadforge_cli::commands;

#[derive(Parser)]
#[command(
    name = "quadforge",
    about = "Static meshes in, walking quadruped robots out",
    version
)]
struct Cli {
    /// TOML configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch candidate meshes from the generation service, or filter
    /// local ones, and write accepted candidates plus a report.
    Ingest(commands::ingest::IngestArgs),
    /// Repair, orient, segment, assemble, and export the 30-variant bank
    /// of one mesh.
    Process(commands::process::ProcessArgs),
    /// Run (or resume) the evolutionary co-optimization loop.
    Evolve(commands::evolve::EvolveArgs),
    /// Export the best genome of a finished run as URDF + meshes.
    Export(commands::export::ExportArgs),
    /// Emit CSV and SVG fitness reports for a run directory.
    Report(commands::report::ReportArgs),
    /// Serve the bundled mock text-to-3D service (testing fixture).
    MockService(commands::mock::MockArgs),
    /// Built-in evaluator speaking the exchange protocol on stdin/stdout.
    EvalWorker(commands::eval_worker::EvalWorkerArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest::run(cli.config.as_deref(), args),
        Command::Process(args) => commands::process::run(cli.config.as_deref(), args),
        Command::Evolve(args) => commands::evolve::run(cli.config.as_deref(), args),
        Command::Export(args) => commands::export::run(cli.config.as_deref(), args),
        Command::Report(args) => commands::report::run(args),
        Command::MockService(args) => commands::mock::run(args),
        Command::EvalWorker(args) => commands::eval_worker::run(cli.config.as_deref(), args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
