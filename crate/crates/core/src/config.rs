//! Global configuration: one struct per subsystem, all with defaults, so a
//! config file only needs the fields it overrides.

use serde::{Deserialize, Serialize};

use crate::eval::GaitSearchConfig;
use crate::model::{AssemblyConfig, ElectronicsSpec};
use crate::reward::{CommandProfile, RewardWeights};
use crate::segmentation::{SegmentationConfig, UpAxis};
use crate::sim::SimConfig;

/// Candidate ingestion settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestionConfig {
    /// Bilateral symmetry acceptance threshold.
    pub symmetry_threshold: f64,
    /// Monte-Carlo samples for the symmetry score.
    pub symmetry_samples: usize,
    pub symmetry_seed: u64,
    /// Which source axis points up in incoming meshes.
    pub up_axis: UpAxis,
    /// Meters per model unit of incoming meshes.
    pub units_scale: f64,
    /// Candidates to request from the generation service.
    pub candidate_count: usize,
    /// Normalized solid volume, m³.
    pub target_volume: f64,
}

impl Default for IngestionConfig {
    fn default() -> Self {
        Self {
            symmetry_threshold: 0.90,
            symmetry_samples: 100_000,
            symmetry_seed: 0,
            up_axis: UpAxis::Z,
            units_scale: 1.0,
            candidate_count: 4,
            target_volume: 6.3e-3,
        }
    }
}

/// Evolution-loop sizing (mirrors `evo::EvolutionConfig`, minus the seed
/// and preference which come from CLI flags).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionSettings {
    pub generations: u32,
    pub elite_count: usize,
    pub mutant_count: usize,
    pub crossover_count: usize,
    pub initial_size: Option<usize>,
    pub parallel: bool,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        Self {
            generations: 20,
            elite_count: 100,
            mutant_count: 50,
            crossover_count: 50,
            initial_size: None,
            parallel: true,
        }
    }
}

/// The whole configuration file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalConfig {
    pub sim: SimConfig,
    pub reward: RewardWeights,
    pub command: CommandProfile,
    pub segmentation: SegmentationConfig,
    pub assembly: AssemblyConfig,
    pub electronics: ElectronicsSpec,
    pub gait_search: GaitSearchConfig,
    pub evolution: EvolutionSettings,
    pub ingestion: IngestionConfig,
}
