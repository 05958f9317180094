//! `ingest`: fetch candidates from the generation service (or take local
//! files), run the acceptance filters, write accepted meshes + report.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use quadforge::error::{Error, Result};
use quadforge::mesh::{load_mesh_bytes, save_stl_binary, MeshFormat};

use crate::filters::{check_candidate, CandidateReport};
use crate::http;

/// Exit code for "nothing accepted" (distinct from hard failures).
pub const EXIT_EMPTY_RESULT: u8 = 6;

#[derive(Args)]
pub struct IngestArgs {
    /// One to three words describing the robot; requests candidates from
    /// the remote service ($TEXT2ROBOT_ENDPOINT / $TEXT2ROBOT_API_KEY).
    #[arg(long, conflicts_with = "local")]
    pub description: Option<String>,
    /// Local mesh files to filter instead of calling the service.
    #[arg(long, num_args = 1..)]
    pub local: Vec<PathBuf>,
    /// Candidates to request from the service.
    #[arg(long)]
    pub count: Option<usize>,
    /// Output directory for accepted meshes and the report.
    #[arg(long, default_value = "ingest_out")]
    pub out: PathBuf,
}

pub fn run(config: Option<&Path>, args: IngestArgs) -> Result<ExitCode> {
    let cfg = super::load_config(config)?;
    let mut prompt = None;

    let raw_candidates: Vec<(String, Vec<u8>)> = if let Some(description) = &args.description {
        // Credentials are checked before any network traffic.
        let endpoint = std::env::var("TEXT2ROBOT_ENDPOINT").map_err(|_| {
            Error::Config("TEXT2ROBOT_ENDPOINT is not set".into())
        })?;
        let api_key = std::env::var("TEXT2ROBOT_API_KEY").map_err(|_| {
            Error::Config("TEXT2ROBOT_API_KEY is not set".into())
        })?;
        let rendered = http::render_prompt(description)?;
        println!("prompt: {rendered}");
        let count = args.count.unwrap_or(cfg.ingestion.candidate_count);
        let payloads = http::request_candidates(&endpoint, &api_key, &rendered, count)?;
        prompt = Some(rendered);
        payloads.into_iter().map(|p| (p.id, p.bytes)).collect()
    } else if !args.local.is_empty() {
        args.local
            .iter()
            .map(|path| {
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "candidate".into());
                Ok((id, std::fs::read(path)?))
            })
            .collect::<Result<_>>()?
    } else {
        return Err(Error::Config(
            "ingest needs either --description or --local <paths>".into(),
        ));
    };

    std::fs::create_dir_all(&args.out)?;
    let mut report = CandidateReport { prompt, candidates: Vec::new() };
    let mut accepted = 0usize;
    for (id, bytes) in &raw_candidates {
        let parsed = load_mesh_bytes(bytes, MeshFormat::Stl, cfg.ingestion.units_scale)
            .or_else(|_| load_mesh_bytes(bytes, MeshFormat::Obj, cfg.ingestion.units_scale));
        match parsed {
            Ok(raw) => {
                let (checks, prepared) = check_candidate(id, &raw, &cfg);
                if checks.accepted {
                    accepted += 1;
                    let mesh = prepared.expect("accepted candidates are prepared");
                    save_stl_binary(&mesh, &args.out.join(format!("{id}.stl")))?;
                }
                println!(
                    "{id}: connectivity {} | symmetry {:.3} {} | legs {} -> {}",
                    if checks.connectivity_ok { "ok" } else { "FAIL" },
                    checks.symmetry_score,
                    if checks.symmetry_ok { "ok" } else { "FAIL" },
                    if checks.legs_ok { "ok" } else { "FAIL" },
                    if checks.accepted { "ACCEPT" } else { "reject" },
                );
                report.candidates.push(checks);
            }
            Err(e) => {
                println!("{id}: unreadable mesh ({e}) -> reject");
                report.candidates.push(crate::filters::CandidateChecks {
                    id: id.clone(),
                    connectivity_ok: false,
                    component_count: 0,
                    symmetry_score: 0.0,
                    symmetry_ok: false,
                    legs_ok: false,
                    accepted: false,
                    notes: vec![format!("parse failure: {e}")],
                });
            }
        }
    }
    std::fs::write(
        args.out.join("candidate_report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    println!("{accepted}/{} candidates accepted -> {}", raw_candidates.len(), args.out.display());
    if accepted == 0 {
        eprintln!("warning: no candidate passed the filters");
        return Ok(ExitCode::from(EXIT_EMPTY_RESULT));
    }
    super::ok()
}
