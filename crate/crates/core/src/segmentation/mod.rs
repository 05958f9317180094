//! Joint allocation: orient the mesh into the canonical frame, find the two
//! separation planes at cross-section minima, partition into base + four
//! legs, and place shoulder/knee joints from section centroids.
//!
//! Canonical frame: +z up, +y the longitudinal (facing) axis, center of
//! mass on the z axis, lowest point grounded at z = 0. Tags follow the
//! facing direction: front is +y, and with +z up the robot's right side is
//! +x.

mod joints;
mod orient;
mod partition;
mod planes;

pub use joints::{place_knee_joints, place_shoulder_joints, Axis, JointKind, JointSpec};
pub use orient::{orient_canonical, CanonicalReport, UpAxis};
pub use partition::{segment, split_and_offset_limbs, BodyPartition, LegSegment, SegmentationReport};
pub use planes::{find_separation_planes, SliceScan};

use serde::{Deserialize, Serialize};

/// Leg positions, fixed order: FL, FR, RL, RR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LegTag {
    FrontLeft,
    FrontRight,
    RearLeft,
    RearRight,
}

impl LegTag {
    pub const ALL: [LegTag; 4] = [
        LegTag::FrontLeft,
        LegTag::FrontRight,
        LegTag::RearLeft,
        LegTag::RearRight,
    ];

    pub fn index(self) -> usize {
        match self {
            LegTag::FrontLeft => 0,
            LegTag::FrontRight => 1,
            LegTag::RearLeft => 2,
            LegTag::RearRight => 3,
        }
    }

    pub fn is_front(self) -> bool {
        matches!(self, LegTag::FrontLeft | LegTag::FrontRight)
    }

    pub fn is_right(self) -> bool {
        matches!(self, LegTag::FrontRight | LegTag::RearRight)
    }

    pub fn name(self) -> &'static str {
        match self {
            LegTag::FrontLeft => "front_left",
            LegTag::FrontRight => "front_right",
            LegTag::RearLeft => "rear_left",
            LegTag::RearRight => "rear_right",
        }
    }

    /// Tag with left/right swapped.
    pub fn mirrored(self) -> LegTag {
        match self {
            LegTag::FrontLeft => LegTag::FrontRight,
            LegTag::FrontRight => LegTag::FrontLeft,
            LegTag::RearLeft => LegTag::RearRight,
            LegTag::RearRight => LegTag::RearLeft,
        }
    }
}

/// Tunables of the segmentation pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    /// Longitudinal slice spacing for the separation-plane scan, m.
    pub slice_step: f64,
    /// Vertical slice spacing for knee placement, m.
    pub knee_step: f64,
    /// Knee traversal stops this far above the lowest mesh point, m.
    pub ground_margin: f64,
    /// Motor clearance trimmed off each limb at its joint, m.
    pub limb_offset: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self { slice_step: 0.002, knee_step: 0.002, ground_margin: 0.02, limb_offset: 0.04 }
    }
}
