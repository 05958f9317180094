//! Open-loop symmetric gait: one sinusoid per body level, all four legs
//! tied, diagonal leg pairs half a period apart (trot wiring).

use serde::{Deserialize, Serialize};

use crate::model::JointLimits;

/// One body level's wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelWave {
    /// rad
    pub amplitude: f64,
    /// rad
    pub phase: f64,
    /// rad
    pub offset: f64,
}

/// Gait parameters, symmetry-tied per body level: every shoulder shares
/// one wave, every knee another; the frequency is global. Diagonal pairs
/// (FL+RR vs FR+RL) run π apart, which is structural, not searched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitParams {
    /// Hz, in (0, 4].
    pub frequency: f64,
    pub shoulder: LevelWave,
    pub knee: LevelWave,
}

impl GaitParams {
    /// The silent gait: zero amplitude, zero offsets, 1 Hz carrier.
    pub fn zero() -> Self {
        let still = LevelWave { amplitude: 0.0, phase: 0.0, offset: 0.0 };
        GaitParams { frequency: 1.0, shoulder: still, knee: still }
    }

    /// Joint-position targets at time `t`, in model joint order
    /// (per leg: shoulder, knee; legs FL, FR, RL, RR).
    pub fn targets(&self, t: f64) -> [f64; 8] {
        let omega = 2.0 * std::f64::consts::PI * self.frequency;
        let mut q = [0.0; 8];
        for leg in 0..4 {
            // FL and RR swing together; FR and RL run half a period later.
            let diag = if leg == 0 || leg == 3 { 0.0 } else { std::f64::consts::PI };
            let base = omega * t + diag;
            q[2 * leg] = self.shoulder.offset
                + self.shoulder.amplitude * (base + self.shoulder.phase).sin();
            q[2 * leg + 1] =
                self.knee.offset + self.knee.amplitude * (base + self.knee.phase).sin();
        }
        q
    }

    /// Clamps amplitudes/offsets into the joint limits and the frequency
    /// into (0, 4].
    pub fn clamped(mut self, limits: &JointLimits) -> Self {
        self.frequency = self.frequency.clamp(0.05, 4.0);
        for wave in [&mut self.shoulder, &mut self.knee] {
            wave.amplitude = wave.amplitude.clamp(0.0, (limits.upper - limits.lower) / 2.0);
            let lo = limits.lower + wave.amplitude;
            let hi = limits.upper - wave.amplitude;
            wave.offset = if lo <= hi { wave.offset.clamp(lo, hi) } else { 0.0 };
            wave.phase = wave.phase.rem_euclid(2.0 * std::f64::consts::PI);
        }
        self
    }
}
