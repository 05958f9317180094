//! `evolve`: the outer genetic loop over one or more processed designs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use quadforge::error::{Error, Result};
use quadforge::evo::{
    run_evolution, BuiltinMemberEvaluator, DesignRepository, EvolutionConfig,
    ExternalMemberEvaluator,
};
use quadforge::eval::{BuiltinEvaluator, Endpoint, ExternalEvaluator, Preference};
use serde::{Deserialize, Serialize};

use super::process::load_bank_labels;

#[derive(Args)]
pub struct EvolveArgs {
    /// Processed design directories (output of `process`), one per source.
    #[arg(long, num_args = 1.., required = true)]
    pub design: Vec<PathBuf>,
    /// Run directory for checkpoints and records; resumes when it already
    /// holds generations.
    #[arg(long, default_value = "evolve_run")]
    pub run: PathBuf,
    #[arg(long, default_value = "none")]
    pub preference: String,
    #[arg(long)]
    pub generations: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rollouts per member evaluation.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Cap the initial population (default: all bank variants).
    #[arg(long)]
    pub init_size: Option<usize>,
    /// External evaluator command (program + args); the built-in gait
    /// search runs when absent.
    #[arg(long, num_args = 1..)]
    pub evaluator_cmd: Vec<String>,
    /// Seconds before an external evaluation counts as timed out.
    #[arg(long, default_value_t = 3600)]
    pub evaluator_timeout: u64,
}

/// Echo of the identity-defining settings; resume refuses on mismatch.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct RunMeta {
    schema: u32,
    seed: u64,
    preference: String,
    generations: u32,
    elite_count: usize,
    mutant_count: usize,
    crossover_count: usize,
    init_size: Option<usize>,
    sources: Vec<String>,
}

pub fn run(config: Option<&Path>, args: EvolveArgs) -> Result<ExitCode> {
    let cfg = super::load_config(config)?;
    let preference = Preference::parse(&args.preference)?;

    // Load every design: repository geometries + bank labels.
    let mut repo = DesignRepository::default();
    let mut banks = Vec::new();
    let mut sources = Vec::new();
    for dir in &args.design {
        repo.load_dir(&dir.join("repository"))?;
        let (source_id, labels) = load_bank_labels(dir)?;
        sources.push(source_id.clone());
        banks.push(quadforge::evo::bank_from_labels(&source_id, &labels));
    }

    let evo_cfg = EvolutionConfig {
        generations: args.generations.unwrap_or(cfg.evolution.generations),
        elite_count: cfg.evolution.elite_count,
        mutant_count: cfg.evolution.mutant_count,
        crossover_count: cfg.evolution.crossover_count,
        initial_size: args.init_size.or(cfg.evolution.initial_size),
        preference,
        seed: args.seed,
        parallel: cfg.evolution.parallel,
    };

    let meta = RunMeta {
        schema: 1,
        seed: evo_cfg.seed,
        preference: preference.name().into(),
        generations: evo_cfg.generations,
        elite_count: evo_cfg.elite_count,
        mutant_count: evo_cfg.mutant_count,
        crossover_count: evo_cfg.crossover_count,
        init_size: evo_cfg.initial_size,
        sources: sources.clone(),
    };
    std::fs::create_dir_all(&args.run)?;
    let meta_path = args.run.join("run_meta.json");
    if meta_path.exists() {
        let existing: RunMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
        let mut resumed = existing;
        // A longer horizon on resume is fine; everything else must match.
        let requested_generations = meta.generations;
        resumed.generations = requested_generations;
        if resumed != meta {
            return Err(Error::Config(format!(
                "{} belongs to a different run configuration",
                args.run.display()
            )));
        }
    }
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
    // Repository snapshot so `export` can realize genomes later.
    repo.save_dir(&args.run.join("repository"))?;

    let mut builtin = BuiltinEvaluator {
        sim: cfg.sim.clone(),
        weights: cfg.reward,
        command: cfg.command,
        search: cfg.gait_search.clone(),
    };
    if let Some(budget) = args.budget {
        builtin.search.budget = budget;
    }

    let history = if args.evaluator_cmd.is_empty() {
        let evaluator = BuiltinMemberEvaluator {
            evaluator: builtin,
            electronics: cfg.electronics.clone(),
            assembly: cfg.assembly.clone(),
        };
        run_evolution(&banks, &repo, &evaluator, &evo_cfg, Some(&args.run))?
    } else {
        let evaluator = ExternalMemberEvaluator {
            client: ExternalEvaluator {
                endpoint: Endpoint::Subprocess {
                    program: args.evaluator_cmd[0].clone(),
                    args: args.evaluator_cmd[1..].to_vec(),
                },
                timeout: std::time::Duration::from_secs(args.evaluator_timeout),
                retries: 1,
            },
            workdir: args.run.join("external_work"),
            command: cfg.command,
            electronics: cfg.electronics.clone(),
            assembly: cfg.assembly.clone(),
        };
        run_evolution(&banks, &repo, &evaluator, &evo_cfg, Some(&args.run))?
    };

    let last = history.last().expect("at least one generation");
    println!(
        "generation {}: best fitness {:.4} (member {}), mean {:.4} -> {}",
        last.generation,
        last.best_fitness,
        last.best_id,
        last.mean_fitness,
        args.run.display()
    );
    super::ok()
}
