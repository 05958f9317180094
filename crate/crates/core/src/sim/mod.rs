//! Deterministic rigid-body simulation of the 8-joint robot: reduced
//! (generalized) coordinates over a floating base, PD joint actuation,
//! penalty ground contact, semi-implicit Euler integration.
//!
//! The generalized velocity is `[v_com0, ω0, θ̇[8]]` — world-frame linear
//! velocity of the base body's center of mass, world-frame angular
//! velocity, and the joint rates. Mass matrix and bias forces are built
//! from per-body point Jacobians, which keeps every term an ordinary
//! vector identity.

mod dynamics;
mod model;
mod rollout;

pub use dynamics::{compute_udot, pd_torques, step_substep};
pub use model::{forward_kinematics, Kinematics, SimBody, SimJoint, SimModel, SimState};
pub use rollout::{rollout_with_targets, Trajectory};

use serde::{Deserialize, Serialize};

/// Penalty contact parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactParams {
    /// Normal stiffness, N/m.
    pub kn: f64,
    /// Normal damping, N·s/m.
    pub dn: f64,
    /// Coulomb friction coefficient.
    pub mu: f64,
    /// Tangential viscous slope (capped by the friction cone), N·s/m.
    pub kt: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self { kn: 20_000.0, dn: 50.0, mu: 0.8, kt: 50.0 }
    }
}

/// Simulation tunables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Control (and reward) period, s.
    pub control_dt: f64,
    /// Physics substeps per control period.
    pub substeps: u32,
    /// Gravity magnitude, m/s² (0 disables gravity).
    pub gravity: f64,
    /// PD proportional gain, N·m/rad.
    pub kp: f64,
    /// PD derivative gain, N·m·s/rad.
    pub kd: f64,
    pub contact: ContactParams,
    pub contacts_enabled: bool,
    /// Restoring stiffness past joint limits, N·m/rad.
    pub joint_limit_stiffness: f64,
    /// Structural joint damping, N·m·s/rad.
    pub joint_damping: f64,
    /// Contact points kept per link.
    pub contact_points_per_link: usize,
    /// Base lift above touch-down at spawn, m.
    pub spawn_clearance: f64,
    /// Speed beyond which the rollout counts as diverged, m/s.
    pub abort_speed: f64,
    /// Lock the base (testing aid): only joint coordinates integrate.
    pub fixed_base: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            control_dt: 0.01,
            substeps: 10,
            gravity: 9.81,
            kp: 12.0,
            kd: 0.4,
            contact: ContactParams::default(),
            contacts_enabled: true,
            joint_limit_stiffness: 60.0,
            joint_damping: 0.01,
            contact_points_per_link: 24,
            spawn_clearance: 0.002,
            abort_speed: 50.0,
            fixed_base: false,
        }
    }
}
