//! Evolutionary outer loop over robot morphologies: genome, design
//! repository, symmetric genetic operators, elitist generation step,
//! checkpointed runs, and reporting.

mod genome;
mod operators;
mod population;
mod report;
mod repository;
mod run;

pub use genome::{Lineage, MutationCategory, OperationTag, RobotGenome};
pub use operators::{crossover, mutate};
pub use population::{bank_from_labels, init_population, Population, PopulationMember};
pub use report::{write_csv_report, write_fitness_svg};
pub use repository::{BodyGeometry, DesignRepository, LimbGeometry, LimbLevel};
pub use run::{
    load_history,
    resume_or_init, run_evolution, step_generation, BuiltinMemberEvaluator, EvolutionConfig,
    EvolutionHistory, ExternalMemberEvaluator, GenerationRecord, MemberEvaluator, MemberRecord,
};
