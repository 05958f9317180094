//! Evolvable robot description.
//!
//! Symmetry is structural: a genome holds one geometry choice per body
//! level, one leg-scale index, and one joint axis per level, each applied
//! to all four legs at realization time. No operator can produce an
//! asymmetric robot.

use serde::{Deserialize, Serialize};

use crate::segmentation::Axis;

/// Mutation categories with their draw probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationCategory {
    LimbLength,
    LimbShape,
    BodyShape,
    JointAxis,
    NoOp,
}

/// How a genome came to be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OperationTag {
    Init,
    Mutation {
        category: MutationCategory,
        /// The drawn category had no effect (no alternatives, or a clamp).
        degenerate: bool,
    },
    Crossover {
        /// True when a joint-axis level was swapped, false for a limb.
        swapped_joint: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub parents: Vec<u64>,
    pub op: OperationTag,
}

/// The genome: everything needed to realize a robot from the design
/// repository.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotGenome {
    /// Originating bank/species tag (provenance).
    pub source_id: String,
    /// Repository ids, one geometry per body level.
    pub body_choice: String,
    pub upper_choice: String,
    pub lower_choice: String,
    /// Leg elongation ladder position, 0..=9.
    pub leg_scale_index: u8,
    /// Rotation axis per joint level, applied to all four legs.
    pub shoulder_axis: Axis,
    pub knee_axis: Axis,
    pub lineage: Lineage,
}

impl RobotGenome {
    /// One symmetry class per body level by construction; this checks the
    /// representable invariants (ladder bounds).
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.leg_scale_index > 9 {
            return Err(crate::error::Error::Config(format!(
                "leg scale index {} out of 0..=9",
                self.leg_scale_index
            )));
        }
        Ok(())
    }
}
