//! Generation stepping and the checkpointed evolution loop.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::genome::RobotGenome;
use super::operators::{crossover, mutate};
use super::population::{init_population, Population, PopulationMember};
use super::repository::DesignRepository;
use crate::error::{Error, Result};
use crate::eval::{
    BuiltinEvaluator, EvalRequest, EvaluationResult, ExternalEvaluator, Preference,
};
use crate::model::{export_urdf, AssemblyConfig, ElectronicsSpec, VariantBank};
use crate::rng::{derive_seed, rng_for};

/// Outer-loop configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub generations: u32,
    /// Elite survivors per generation.
    pub elite_count: usize,
    /// Fresh robots per generation from each operator.
    pub mutant_count: usize,
    pub crossover_count: usize,
    /// Cap on the initial enumeration (None = every bank variant).
    pub initial_size: Option<usize>,
    pub preference: Preference,
    pub seed: u64,
    /// Parallel member evaluations (native targets only).
    pub parallel: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            generations: 20,
            elite_count: 100,
            mutant_count: 50,
            crossover_count: 50,
            initial_size: None,
            preference: Preference::None,
            seed: 0,
            parallel: true,
        }
    }
}

impl EvolutionConfig {
    pub fn population_size(&self) -> usize {
        self.elite_count + self.mutant_count + self.crossover_count
    }
}

/// Scores one genome. Implementations must be pure in (genome, seed).
pub trait MemberEvaluator: Sync {
    fn evaluate(
        &self,
        genome: &RobotGenome,
        repo: &DesignRepository,
        preference: Preference,
        seed: u64,
    ) -> EvaluationResult;
}

/// The in-process evaluator: realize the genome and run the gait search.
pub struct BuiltinMemberEvaluator {
    pub evaluator: BuiltinEvaluator,
    pub electronics: ElectronicsSpec,
    pub assembly: AssemblyConfig,
}

impl MemberEvaluator for BuiltinMemberEvaluator {
    fn evaluate(
        &self,
        genome: &RobotGenome,
        repo: &DesignRepository,
        preference: Preference,
        seed: u64,
    ) -> EvaluationResult {
        match repo.realize(genome, &self.electronics, &self.assembly) {
            Ok(model) => self.evaluator.evaluate(&model, preference, seed),
            Err(_) => EvaluationResult::failed(seed),
        }
    }
}

/// Delegates scoring to an external process: the genome is realized,
/// exported as URDF, and described in an exchange request.
pub struct ExternalMemberEvaluator {
    pub client: ExternalEvaluator,
    pub workdir: PathBuf,
    pub command: crate::reward::CommandProfile,
    pub electronics: ElectronicsSpec,
    pub assembly: AssemblyConfig,
}

impl MemberEvaluator for ExternalMemberEvaluator {
    fn evaluate(
        &self,
        genome: &RobotGenome,
        repo: &DesignRepository,
        preference: Preference,
        seed: u64,
    ) -> EvaluationResult {
        let run = || -> Result<EvaluationResult> {
            let mut model = repo.realize(genome, &self.electronics, &self.assembly)?;
            let id = format!("eval_{seed:016x}");
            model.name = id.clone();
            let dir = self.workdir.join(&id);
            let urdf = export_urdf(&model, &dir)?;
            let request = EvalRequest::new(
                id,
                urdf.to_string_lossy(),
                self.command,
                preference.name(),
                seed,
            );
            Ok(self.client.evaluate(&request)?.into_result(seed))
        };
        run().unwrap_or_else(|_| EvaluationResult::failed(seed))
    }
}

/// Per-generation record written to the run directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberRecord {
    pub id: u64,
    pub genome: RobotGenome,
    pub result: Option<EvaluationResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u32,
    pub members: Vec<MemberRecord>,
    pub next_id: u64,
    pub best_id: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Sums of the best member, for reporting.
    pub best_velocity_sum: f64,
    pub best_energy_sum: f64,
    /// Selection fell back to fewer elites than configured.
    pub short_selection: bool,
}

/// Full run history, oldest generation first.
pub type EvolutionHistory = Vec<GenerationRecord>;

/// Evaluates every pending member in place. Results depend only on
/// (genome, member id, master seed), never on scheduling.
fn evaluate_pending(
    pop: &mut Population,
    evaluator: &dyn MemberEvaluator,
    repo: &DesignRepository,
    cfg: &EvolutionConfig,
) {
    let pending: Vec<usize> = (0..pop.members.len())
        .filter(|&i| pop.members[i].result.is_none())
        .collect();
    let jobs: Vec<(usize, RobotGenome, u64)> = pending
        .iter()
        .map(|&i| {
            let m = &pop.members[i];
            (i, m.genome.clone(), derive_seed(cfg.seed, "eval", &[m.id]))
        })
        .collect();

    let results: Vec<(usize, EvaluationResult)> = if cfg.parallel && jobs.len() > 1 {
        parallel_map(&jobs, |(_, genome, seed)| {
            evaluator.evaluate(genome, repo, cfg.preference, *seed)
        })
        .into_iter()
        .zip(&jobs)
        .map(|(r, (i, _, _))| (*i, r))
        .collect()
    } else {
        jobs.iter()
            .map(|(i, genome, seed)| (*i, evaluator.evaluate(genome, repo, cfg.preference, *seed)))
            .collect()
    };
    for (i, r) in results {
        pop.members[i].result = Some(r);
    }
}

/// Order-preserving scoped-thread map; sequential on wasm targets.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    #[cfg(target_arch = "wasm32")]
    {
        return items.iter().map(f).collect();
    }
    #[cfg(not(target_arch = "wasm32"))]
    {
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(items.len().max(1));
        if workers <= 1 {
            return items.iter().map(f).collect();
        }
        let mut out: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots = std::sync::Mutex::new(&mut out);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= items.len() {
                        break;
                    }
                    let r = f(&items[i]);
                    slots.lock().unwrap()[i] = Some(r);
                });
            }
        });
        out.into_iter().map(|r| r.expect("worker filled every slot")).collect()
    }
}

/// Ranks members by fitness under the run preference (descending), ties by
/// ascending member id.
fn ranked_indices(pop: &Population, preference: Preference) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pop.members.len()).collect();
    idx.sort_by(|&a, &b| {
        let fa = pop.members[a].result.as_ref().map_or(f64::NEG_INFINITY, |r| {
            r.fitness_under(preference)
        });
        let fb = pop.members[b].result.as_ref().map_or(f64::NEG_INFINITY, |r| {
            r.fitness_under(preference)
        });
        fb.partial_cmp(&fa)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(pop.members[a].id.cmp(&pop.members[b].id))
    });
    idx
}

/// One selection/reproduction step: keep the elites (with their stored
/// results), then breed the configured number of mutants and crossover
/// children from them.
pub fn step_generation(
    pop: &Population,
    repo: &DesignRepository,
    cfg: &EvolutionConfig,
) -> Population {
    let ranked = ranked_indices(pop, cfg.preference);
    let elite_n = cfg.elite_count.min(ranked.len());
    let elites: Vec<PopulationMember> =
        ranked[..elite_n].iter().map(|&i| pop.members[i].clone()).collect();

    let next_generation = pop.generation + 1;
    let mut rng = rng_for(cfg.seed, "step", &[next_generation as u64]);
    let mut next_id = pop.next_id;
    let mut members = elites.clone();
    for _ in 0..cfg.mutant_count {
        let parent = &elites[rng.gen_range(0..elites.len())];
        let child = mutate(&parent.genome, parent.id, repo, &mut rng);
        members.push(PopulationMember { id: next_id, genome: child, result: None });
        next_id += 1;
    }
    for _ in 0..cfg.crossover_count {
        let a = &elites[rng.gen_range(0..elites.len())];
        let b = &elites[rng.gen_range(0..elites.len())];
        let child = crossover(&a.genome, a.id, &b.genome, b.id, &mut rng);
        members.push(PopulationMember { id: next_id, genome: child, result: None });
        next_id += 1;
    }
    Population { generation: next_generation, members, next_id }
}

fn record_of(pop: &Population, cfg: &EvolutionConfig) -> GenerationRecord {
    let ranked = ranked_indices(pop, cfg.preference);
    let best = &pop.members[ranked[0]];
    let fitnesses: Vec<f64> = pop
        .members
        .iter()
        .filter_map(|m| m.result.as_ref().map(|r| r.fitness_under(cfg.preference)))
        .collect();
    let mean = if fitnesses.is_empty() {
        0.0
    } else {
        fitnesses.iter().sum::<f64>() / fitnesses.len() as f64
    };
    let best_result = best.result.as_ref();
    GenerationRecord {
        generation: pop.generation,
        members: pop
            .members
            .iter()
            .map(|m| MemberRecord { id: m.id, genome: m.genome.clone(), result: m.result.clone() })
            .collect(),
        next_id: pop.next_id,
        best_id: best.id,
        best_fitness: best_result.map_or(0.0, |r| r.fitness_under(cfg.preference)),
        mean_fitness: mean,
        best_velocity_sum: best_result.map_or(0.0, |r| r.velocity_term_sum),
        best_energy_sum: best_result.map_or(0.0, |r| r.energy_term_sum),
        short_selection: pop.evaluated_count() < cfg.elite_count,
    }
}

fn population_from_record(rec: &GenerationRecord) -> Population {
    Population {
        generation: rec.generation,
        members: rec
            .members
            .iter()
            .map(|m| PopulationMember {
                id: m.id,
                genome: m.genome.clone(),
                result: m.result.clone(),
            })
            .collect(),
        next_id: rec.next_id,
    }
}

fn record_path(dir: &Path, generation: u32) -> PathBuf {
    dir.join(format!("gen_{generation:04}.json"))
}

fn write_record(dir: &Path, rec: &GenerationRecord) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = record_path(dir, rec.generation);
    std::fs::write(path, serde_json::to_string(rec)?)?;
    Ok(())
}

/// Loads the stored generations of a run directory, oldest first.
pub fn load_history(dir: &Path) -> Result<EvolutionHistory> {
    let mut records = Vec::new();
    for g in 0u32.. {
        let path = record_path(dir, g);
        if !path.exists() {
            break;
        }
        records.push(serde_json::from_str(&std::fs::read_to_string(path)?)?);
    }
    Ok(records)
}

/// Initializes the population or resumes it from the newest checkpoint in
/// `out_dir`. Returns the population plus any records already on disk.
pub fn resume_or_init(
    banks: &[VariantBank],
    cfg: &EvolutionConfig,
    out_dir: Option<&Path>,
) -> Result<(Population, EvolutionHistory)> {
    if let Some(dir) = out_dir {
        let history = if dir.exists() { load_history(dir)? } else { Vec::new() };
        if let Some(last) = history.last() {
            return Ok((population_from_record(last), history));
        }
    }
    Ok((init_population(banks, cfg.initial_size, cfg.seed)?, Vec::new()))
}

/// Runs (or resumes) the evolution loop: evaluate, record, select, repeat.
/// With `generations = 0` the history holds only the evaluated initial
/// population.
pub fn run_evolution(
    banks: &[VariantBank],
    repo: &DesignRepository,
    evaluator: &dyn MemberEvaluator,
    cfg: &EvolutionConfig,
    out_dir: Option<&Path>,
) -> Result<EvolutionHistory> {
    if cfg.elite_count == 0 {
        return Err(Error::Config("elite_count must be at least 1".into()));
    }
    let (mut pop, mut history) = resume_or_init(banks, cfg, out_dir)?;

    // A resumed final generation may already be complete.
    while pop.generation <= cfg.generations {
        if pop.evaluated_count() < pop.members.len() {
            evaluate_pending(&mut pop, evaluator, repo, cfg);
            let rec = record_of(&pop, cfg);
            if let Some(dir) = out_dir {
                write_record(dir, &rec)?;
            }
            history.push(rec);
        } else if history.is_empty()
            || history.last().map(|r| r.generation) != Some(pop.generation)
        {
            let rec = record_of(&pop, cfg);
            if let Some(dir) = out_dir {
                write_record(dir, &rec)?;
            }
            history.push(rec);
        }
        if pop.generation == cfg.generations {
            break;
        }
        pop = step_generation(&pop, repo, cfg);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evo::genome::{Lineage, OperationTag};
    use crate::evo::repository::LimbLevel;
    use crate::segmentation::Axis;

    /// Deterministic stand-in evaluator: fitness from a hash of the
    /// genome, no physics.
    struct HashEvaluator;

    impl MemberEvaluator for HashEvaluator {
        fn evaluate(
            &self,
            genome: &RobotGenome,
            _repo: &DesignRepository,
            _preference: Preference,
            seed: u64,
        ) -> EvaluationResult {
            let mut h = derive_seed(seed, &genome.body_choice, &[genome.leg_scale_index as u64]);
            h ^= derive_seed(0, genome.upper_choice.as_str(), &[]);
            let reward = (h % 1000) as f64 / 1000.0;
            EvaluationResult {
                mean_episode_reward: reward,
                velocity_term_sum: reward * 0.1,
                energy_term_sum: reward * 2.0,
                fitness: reward,
                gait_params: None,
                seed,
                failed: false,
            }
        }
    }

    fn fake_banks(n: usize) -> Vec<VariantBank> {
        (0..n)
            .map(|i| {
                let source = format!("s{i}");
                let variants = (0u8..10)
                    .flat_map(|s| Axis::ALL.into_iter().map(move |a| (s, a)))
                    .map(|(scale_index, axis)| crate::model::BankVariant {
                        id: format!("{source}_s{scale_index}_{}", axis.name()),
                        scale_index,
                        axis,
                        model: crate::model::KineticRobotModel {
                            name: "dummy".into(),
                            links: vec![],
                            joints: vec![],
                            electronics: crate::model::ElectronicsSpec::default(),
                            density: 1.0,
                        },
                    })
                    .collect();
                VariantBank { source_id: source, variants, dropped: vec![] }
            })
            .collect()
    }

    fn smoke_cfg() -> EvolutionConfig {
        EvolutionConfig {
            generations: 5,
            elite_count: 10,
            mutant_count: 5,
            crossover_count: 5,
            initial_size: Some(20),
            preference: Preference::None,
            seed: 99,
            parallel: false,
        }
    }

    #[test]
    fn generation_step_composition() {
        let banks = fake_banks(2);
        let cfg = smoke_cfg();
        let repo = DesignRepository::default();
        let mut pop = init_population(&banks, cfg.initial_size, cfg.seed).unwrap();
        evaluate_pending(&mut pop, &HashEvaluator, &repo, &cfg);
        let next = step_generation(&pop, &repo, &cfg);
        assert_eq!(next.members.len(), 20);
        assert_eq!(next.generation, 1);
        let elites = next.members.iter().filter(|m| m.result.is_some()).count();
        assert_eq!(elites, 10, "elites keep their stored results");
        let mutants = next
            .members
            .iter()
            .filter(|m| matches!(m.genome.lineage.op, OperationTag::Mutation { .. }))
            .count();
        let children = next
            .members
            .iter()
            .filter(|m| matches!(m.genome.lineage.op, OperationTag::Crossover { .. }))
            .count();
        assert_eq!((mutants, children), (5, 5));
    }

    #[test]
    fn all_equal_fitness_breaks_ties_by_member_id() {
        struct Flat;
        impl MemberEvaluator for Flat {
            fn evaluate(
                &self,
                _: &RobotGenome,
                _: &DesignRepository,
                _: Preference,
                seed: u64,
            ) -> EvaluationResult {
                EvaluationResult {
                    mean_episode_reward: 1.0,
                    velocity_term_sum: 0.0,
                    energy_term_sum: 0.0,
                    fitness: 1.0,
                    gait_params: None,
                    seed,
                    failed: false,
                }
            }
        }
        let banks = fake_banks(1);
        let cfg = smoke_cfg();
        let repo = DesignRepository::default();
        let mut pop = init_population(&banks, Some(20), cfg.seed).unwrap();
        evaluate_pending(&mut pop, &Flat, &repo, &cfg);
        let ranked = ranked_indices(&pop, Preference::None);
        let ids: Vec<u64> = ranked.iter().map(|&i| pop.members[i].id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn best_fitness_is_monotone_under_elitism() {
        let banks = fake_banks(2);
        let cfg = smoke_cfg();
        let repo = DesignRepository::default();
        let history = run_evolution(&banks, &repo, &HashEvaluator, &cfg, None).unwrap();
        assert_eq!(history.len(), 6);
        for w in history.windows(2) {
            assert!(
                w[1].best_fitness >= w[0].best_fitness - 1e-12,
                "best fitness regressed: {} -> {}",
                w[0].best_fitness,
                w[1].best_fitness
            );
        }
    }

    #[test]
    fn zero_generations_records_only_the_initial_population() {
        let banks = fake_banks(1);
        let cfg = EvolutionConfig { generations: 0, ..smoke_cfg() };
        let repo = DesignRepository::default();
        let history = run_evolution(&banks, &repo, &HashEvaluator, &cfg, None).unwrap();
        assert_eq!(history.len(), 1);
        assert_eq!(history[0].generation, 0);
        assert_eq!(history[0].members.len(), 20);
    }

    #[test]
    fn resume_reproduces_the_uninterrupted_run_byte_for_byte() {
        let banks = fake_banks(2);
        let cfg = smoke_cfg();
        let repo = DesignRepository::default();

        let full_dir = tempfile::tempdir().unwrap();
        let full = run_evolution(&banks, &repo, &HashEvaluator, &cfg, Some(full_dir.path()))
            .unwrap();
        assert_eq!(full.len(), 6);

        // Run only through generation 2, then resume to the end.
        let partial_dir = tempfile::tempdir().unwrap();
        let partial_cfg = EvolutionConfig { generations: 2, ..cfg.clone() };
        run_evolution(&banks, &repo, &HashEvaluator, &partial_cfg, Some(partial_dir.path()))
            .unwrap();
        run_evolution(&banks, &repo, &HashEvaluator, &cfg, Some(partial_dir.path())).unwrap();

        for g in 0..=5u32 {
            let a = std::fs::read(record_path(full_dir.path(), g)).unwrap();
            let b = std::fs::read(record_path(partial_dir.path(), g)).unwrap();
            assert_eq!(a, b, "generation {g} records differ after resume");
        }
    }

    #[test]
    fn symmetry_holds_for_every_genome_ever_produced() {
        // Symmetry is structural (one choice per level), so it suffices to
        // check that operators only ever emit well-formed genomes.
        let banks = fake_banks(2);
        let cfg = EvolutionConfig { generations: 8, ..smoke_cfg() };
        let repo = DesignRepository::default();
        let history = run_evolution(&banks, &repo, &HashEvaluator, &cfg, None).unwrap();
        for rec in &history {
            for m in &rec.members {
                m.genome.validate().unwrap();
            }
        }
    }

    #[test]
    fn preference_changes_ranking_but_not_stored_sums() {
        let banks = fake_banks(2);
        let cfg = smoke_cfg();
        let repo = DesignRepository::default();
        let mut pop = init_population(&banks, Some(20), cfg.seed).unwrap();
        evaluate_pending(&mut pop, &HashEvaluator, &repo, &cfg);
        let sums: Vec<(f64, f64, f64)> = pop
            .members
            .iter()
            .map(|m| {
                let r = m.result.as_ref().unwrap();
                (r.mean_episode_reward, r.velocity_term_sum, r.energy_term_sum)
            })
            .collect();
        let _none = ranked_indices(&pop, Preference::None);
        let _vel = ranked_indices(&pop, Preference::Velocity);
        let _energy = ranked_indices(&pop, Preference::Energy);
        let sums_after: Vec<(f64, f64, f64)> = pop
            .members
            .iter()
            .map(|m| {
                let r = m.result.as_ref().unwrap();
                (r.mean_episode_reward, r.velocity_term_sum, r.energy_term_sum)
            })
            .collect();
        assert_eq!(sums, sums_after);
    }

    #[test]
    fn mutation_parents_are_elites() {
        let banks = fake_banks(2);
        let cfg = smoke_cfg();
        let repo = DesignRepository::default();
        let mut pop = init_population(&banks, cfg.initial_size, cfg.seed).unwrap();
        evaluate_pending(&mut pop, &HashEvaluator, &repo, &cfg);
        let ranked = ranked_indices(&pop, cfg.preference);
        let elite_ids: std::collections::HashSet<u64> =
            ranked[..10].iter().map(|&i| pop.members[i].id).collect();
        let next = step_generation(&pop, &repo, &cfg);
        for m in &next.members {
            if let OperationTag::Mutation { .. } | OperationTag::Crossover { .. } =
                m.genome.lineage.op
            {
                for p in &m.genome.lineage.parents {
                    assert!(elite_ids.contains(p), "parent {p} is not an elite");
                }
            }
        }
        let _ = Lineage { parents: vec![], op: OperationTag::Init };
        let _ = LimbLevel::Upper;
    }
}
