//! `export`: write the best genome of a finished run as URDF + meshes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use quadforge::error::{Error, Result};
use quadforge::evo::{load_history, DesignRepository};
use quadforge::model::export_urdf;

#[derive(Args)]
pub struct ExportArgs {
    /// Run directory written by `evolve`.
    #[arg(long)]
    pub run: PathBuf,
    /// Output directory (default: `<run>/best`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(config: Option<&Path>, args: ExportArgs) -> Result<ExitCode> {
    let cfg = super::load_config(config)?;
    let history = load_history(&args.run)?;
    let last = history.last().ok_or_else(|| {
        Error::Config(format!(
            "no completed run found in {} (no generation records)",
            args.run.display()
        ))
    })?;
    let best = last
        .members
        .iter()
        .find(|m| m.id == last.best_id)
        .ok_or_else(|| Error::Config("best member missing from the final record".into()))?;

    let mut repo = DesignRepository::default();
    repo.load_dir(&args.run.join("repository"))?;
    let mut model = repo.realize(&best.genome, &cfg.electronics, &cfg.assembly)?;
    model.name = format!("best_gen{:04}_m{}", last.generation, best.id);

    let out = args.out.clone().unwrap_or_else(|| args.run.join("best"));
    let urdf = export_urdf(&model, &out)?;
    let summary = serde_json::json!({
        "generation": last.generation,
        "member_id": best.id,
        "fitness": last.best_fitness,
        "genome": best.genome,
        "result": best.result,
        "urdf": urdf.to_string_lossy(),
        "total_mass_kg": model.total_mass(),
    });
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!(
        "best of generation {} (member {}, fitness {:.4}) -> {}",
        last.generation,
        best.id,
        last.best_fitness,
        urdf.display()
    );
    super::ok()
}
