//! Evaluation outcome and preference-scaled fitness.

use serde::{Deserialize, Serialize};

use super::gait::GaitParams;
use crate::error::{Error, Result};

/// User performance priority applied at selection time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Preference {
    #[default]
    None,
    Velocity,
    Energy,
}

impl Preference {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Preference::None),
            "velocity" => Ok(Preference::Velocity),
            "energy" => Ok(Preference::Energy),
            other => Err(Error::Config(format!(
                "unknown preference {other:?}; use none, velocity, or energy"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preference::None => "none",
            Preference::Velocity => "velocity",
            Preference::Energy => "energy",
        }
    }
}

/// One robot's locomotion score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationResult {
    /// Episode reward (sum of per-step rewards) of the best gait found.
    pub mean_episode_reward: f64,
    /// Σ over steps of the weighted linear-velocity-tracking term.
    pub velocity_term_sum: f64,
    /// Σ over steps of Σᵢ |q̇ᵢτᵢ|·dt — actuation energy, J (positive).
    pub energy_term_sum: f64,
    /// Preference-scaled score used for selection.
    pub fitness: f64,
    pub gait_params: Option<GaitParams>,
    pub seed: u64,
    /// True when every rollout diverged; fitness is 0.
    pub failed: bool,
}

impl EvaluationResult {
    pub fn failed(seed: u64) -> Self {
        EvaluationResult {
            mean_episode_reward: 0.0,
            velocity_term_sum: 0.0,
            energy_term_sum: 0.0,
            fitness: 0.0,
            gait_params: None,
            seed,
            failed: true,
        }
    }

    /// Re-scores this result under a (possibly different) preference
    /// without touching the stored sums.
    pub fn fitness_under(&self, preference: Preference) -> f64 {
        compute_fitness(
            self.mean_episode_reward,
            self.velocity_term_sum,
            self.energy_term_sum,
            preference,
        )
    }
}

/// Preference scaling: `none` passes the reward through, `velocity` adds
/// 20× the velocity-tracking sum, `energy` adds 10× the (negative-signed)
/// energy penalty, so efficient robots rank higher.
pub fn compute_fitness(
    mean_episode_reward: f64,
    velocity_term_sum: f64,
    energy_term_sum: f64,
    preference: Preference,
) -> f64 {
    match preference {
        Preference::None => mean_episode_reward,
        Preference::Velocity => mean_episode_reward + 20.0 * velocity_term_sum,
        Preference::Energy => mean_episode_reward + 10.0 * (-energy_term_sum),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_preference_scales_by_twenty() {
        assert_eq!(compute_fitness(5.0, 0.8, 0.0, Preference::Velocity), 5.0 + 20.0 * 0.8);
    }

    #[test]
    fn energy_preference_penalizes_by_ten() {
        // The stored energy sum is positive joules; the penalty enters
        // negative: 5.0 + 10·(−0.3) = 2.0.
        assert_eq!(compute_fitness(5.0, 0.0, 0.3, Preference::Energy), 2.0);
    }

    #[test]
    fn no_preference_is_identity() {
        assert_eq!(compute_fitness(5.0, 123.0, 456.0, Preference::None), 5.0);
    }

    #[test]
    fn rescoring_never_touches_stored_sums() {
        let r = EvaluationResult {
            mean_episode_reward: 3.0,
            velocity_term_sum: 0.5,
            energy_term_sum: 0.2,
            fitness: 3.0,
            gait_params: None,
            seed: 1,
            failed: false,
        };
        let before = (r.mean_episode_reward, r.velocity_term_sum, r.energy_term_sum);
        let _ = r.fitness_under(Preference::Velocity);
        let _ = r.fitness_under(Preference::Energy);
        assert_eq!(before, (r.mean_episode_reward, r.velocity_term_sum, r.energy_term_sum));
    }
}
