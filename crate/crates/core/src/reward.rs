//! Per-step locomotion reward: tracking terms, penalties, gait-rhythm
//! credits, and the two user-adjustable terms.
//!
//! Baseline terms and weights (each multiplied by the step duration dt):
//!
//! | term                      | definition                  | weight  |
//! |---------------------------|-----------------------------|---------|
//! | linear velocity tracking  | e^(−0.25‖v*_xy − v_xy‖²)    | 1       |
//! | angular velocity tracking | e^(−0.25‖ω*_z − ω_z‖²)      | 0.5     |
//! | vertical velocity penalty | v_z²                        | −4      |
//! | roll/pitch rate penalty   | ‖ω_xy‖²                     | −0.05   |
//! | joint acceleration        | ‖q̈‖²                        | −5e−7   |
//! | joint torque              | ‖τ‖²                        | −2e−5   |
//! | action rate               | ‖(a − a_prev)/dt‖²          | −5e−5   |
//! | orientation               | ‖g_b,xy‖²                   | −0.5    |
//! | feet air time             | Σ_k (t_air,k − 0.5)         | 0.1     |
//! | feet stance time          | Σ_k (t_stance,k − 0.5)      | 0.1     |
//!
//! The user terms carry no dt factor: α₁·e^(−0.25‖v*_xy−v_xy‖²) and
//! α₂·Σᵢ|q̇ᵢτᵢ|. Air/stance sums credit a foot exactly at the step its
//! phase ends (see [`StepState`]).

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Commanded base motion for an episode.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct CommandProfile {
    /// Commanded planar velocity (forward, lateral), m/s, base frame.
    pub v_star_xy: Vector2<f64>,
    /// Commanded yaw rate, rad/s.
    pub omega_star_z: f64,
    /// Episode length, s.
    pub duration: f64,
}

impl Default for CommandProfile {
    fn default() -> Self {
        Self { v_star_xy: Vector2::new(0.3, 0.0), omega_star_z: 0.0, duration: 5.0 }
    }
}

impl CommandProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::Config(format!("duration must be positive: {}", self.duration)));
        }
        Ok(())
    }
}

/// Per-timestep simulation record.
///
/// Foot-phase convention: while a foot is airborne `t_air` accumulates and
/// `t_stance` holds zero (and vice versa). At the step a phase ends (the
/// foot touches down / lifts off), the completed duration is reported one
/// last time alongside the flipped contact flag, then resets. So
/// `foot_contact[k] && t_air[k] > 0` marks a touchdown step and
/// `!foot_contact[k] && t_stance[k] > 0` a liftoff step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepState {
    /// Base linear velocity, base frame (x forward), m/s.
    pub v: Vector3<f64>,
    /// Base angular velocity, base frame, rad/s.
    pub omega: Vector3<f64>,
    /// Joint positions, rad.
    pub q: [f64; 8],
    pub q_dot: [f64; 8],
    pub q_ddot: [f64; 8],
    /// PD target joint positions, rad.
    pub q_star: [f64; 8],
    /// Joint torques, N·m.
    pub tau: [f64; 8],
    /// Action vector (the position targets emitted this step).
    pub a: [f64; 8],
    pub a_prev: [f64; 8],
    /// Gravity direction in the base frame, unit.
    pub g_b: Vector3<f64>,
    /// Per-foot ground contact this step (FL, FR, RL, RR).
    pub foot_contact: [bool; 4],
    /// Accumulated air time per foot, s (see type docs).
    pub t_air: [f64; 4],
    pub t_stance: [f64; 4],
    /// Step duration, s.
    pub dt: f64,
}

impl StepState {
    /// A machine-zero state for tests and seeding.
    pub fn zeroed(dt: f64) -> Self {
        Self {
            v: Vector3::zeros(),
            omega: Vector3::zeros(),
            q: [0.0; 8],
            q_dot: [0.0; 8],
            q_ddot: [0.0; 8],
            q_star: [0.0; 8],
            tau: [0.0; 8],
            a: [0.0; 8],
            a_prev: [0.0; 8],
            g_b: -Vector3::z(),
            foot_contact: [false; 4],
            t_air: [0.0; 4],
            t_stance: [0.0; 4],
            dt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (self.g_b.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Evaluation(format!(
                "gravity direction is not unit: |g_b| = {}",
                self.g_b.norm()
            )));
        }
        Ok(())
    }

    fn all_finite(&self) -> bool {
        let arrays = [
            &self.q, &self.q_dot, &self.q_ddot, &self.q_star, &self.tau, &self.a, &self.a_prev,
        ];
        self.v.iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
            && self.g_b.iter().all(|x| x.is_finite())
            && arrays.iter().all(|a| a.iter().all(|x| x.is_finite()))
            && self.t_air.iter().chain(&self.t_stance).all(|x| x.is_finite())
            && self.dt.is_finite()
    }
}

/// All reward weights. Baseline weights are per-dt; the user weights α₁
/// and α₂ apply verbatim.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub alpha1: f64,
    pub alpha2: f64,
    pub linear_tracking: f64,
    pub angular_tracking: f64,
    pub vertical_velocity: f64,
    pub roll_pitch_rate: f64,
    pub joint_acceleration: f64,
    pub joint_torque: f64,
    pub action_rate: f64,
    pub orientation: f64,
    pub feet_air_time: f64,
    pub feet_stance_time: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            alpha1: 0.0,
            alpha2: 0.0,
            linear_tracking: 1.0,
            angular_tracking: 0.5,
            vertical_velocity: -4.0,
            roll_pitch_rate: -0.05,
            joint_acceleration: -5e-7,
            joint_torque: -2e-5,
            action_rate: -5e-5,
            orientation: -0.5,
            feet_air_time: 0.1,
            feet_stance_time: 0.1,
        }
    }
}

/// One step's reward, term by term. `total` is the exact sum.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub linear_tracking: f64,
    pub angular_tracking: f64,
    pub vertical_velocity: f64,
    pub roll_pitch_rate: f64,
    pub joint_acceleration: f64,
    pub joint_torque: f64,
    pub action_rate: f64,
    pub orientation: f64,
    pub feet_air_time: f64,
    pub feet_stance_time: f64,
    pub user_velocity: f64,
    pub user_joint_power: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn terms(&self) -> [f64; 12] {
        [
            self.linear_tracking,
            self.angular_tracking,
            self.vertical_velocity,
            self.roll_pitch_rate,
            self.joint_acceleration,
            self.joint_torque,
            self.action_rate,
            self.orientation,
            self.feet_air_time,
            self.feet_stance_time,
            self.user_velocity,
            self.user_joint_power,
        ]
    }
}

/// Scores one step. Fails on non-finite state (a diverged rollout).
pub fn reward_step(
    state: &StepState,
    command: &CommandProfile,
    w: &RewardWeights,
) -> Result<RewardBreakdown> {
    if !state.all_finite() {
        return Err(Error::Evaluation("non-finite value in step state".into()));
    }
    state.validate()?;
    let dt = state.dt;

    let v_err = command.v_star_xy - Vector2::new(state.v.x, state.v.y);
    let lin_track_raw = (-0.25 * v_err.norm_squared()).exp();
    let w_err = command.omega_star_z - state.omega.z;
    let ang_track_raw = (-0.25 * w_err * w_err).exp();

    let sum_sq = |a: &[f64; 8]| a.iter().map(|x| x * x).sum::<f64>();
    let action_rate_sq = {
        let mut s = 0.0;
        for i in 0..8 {
            let rate = (state.a[i] - state.a_prev[i]) / dt;
            s += rate * rate;
        }
        s
    };

    // Phase-end credits (see StepState docs).
    let mut air_credit = 0.0;
    let mut stance_credit = 0.0;
    for k in 0..4 {
        if state.foot_contact[k] && state.t_air[k] > 0.0 {
            air_credit += state.t_air[k] - 0.5;
        }
        if !state.foot_contact[k] && state.t_stance[k] > 0.0 {
            stance_credit += state.t_stance[k] - 0.5;
        }
    }

    let joint_power: f64 =
        (0..8).map(|i| (state.q_dot[i] * state.tau[i]).abs()).sum();

    let b = RewardBreakdown {
        linear_tracking: w.linear_tracking * dt * lin_track_raw,
        angular_tracking: w.angular_tracking * dt * ang_track_raw,
        vertical_velocity: w.vertical_velocity * dt * state.v.z * state.v.z,
        roll_pitch_rate: w.roll_pitch_rate
            * dt
            * (state.omega.x * state.omega.x + state.omega.y * state.omega.y),
        joint_acceleration: w.joint_acceleration * dt * sum_sq(&state.q_ddot),
        joint_torque: w.joint_torque * dt * sum_sq(&state.tau),
        action_rate: w.action_rate * dt * action_rate_sq,
        orientation: w.orientation
            * dt
            * (state.g_b.x * state.g_b.x + state.g_b.y * state.g_b.y),
        feet_air_time: w.feet_air_time * dt * air_credit,
        feet_stance_time: w.feet_stance_time * dt * stance_credit,
        user_velocity: w.alpha1 * lin_track_raw,
        user_joint_power: w.alpha2 * joint_power,
        total: 0.0,
    };
    let total = b.terms().iter().sum();
    Ok(RewardBreakdown { total, ..b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn perfect_tracking_maximizes_tracking_terms() {
        let mut s = StepState::zeroed(0.01);
        s.v = Vector3::new(0.3, 0.0, 0.0);
        let cmd = CommandProfile::default();
        let b = reward_step(&s, &cmd, &RewardWeights::default()).unwrap();
        assert_relative_eq!(b.linear_tracking, 0.01, epsilon = 1e-15);
        assert_relative_eq!(b.angular_tracking, 0.005, epsilon = 1e-15);
        assert_relative_eq!(b.vertical_velocity, 0.0, epsilon = 1e-18);
        assert_relative_eq!(b.joint_torque, 0.0, epsilon = 1e-18);
        assert_relative_eq!(b.total, 0.015, epsilon = 1e-15);
    }

    #[test]
    fn tracking_error_discounts_exponentially() {
        let s = StepState::zeroed(0.01);
        let cmd = CommandProfile {
            v_star_xy: Vector2::new(0.1, 0.0),
            omega_star_z: 0.0,
            duration: 1.0,
        };
        let b = reward_step(&s, &cmd, &RewardWeights::default()).unwrap();
        // 0.01 · e^(−0.25·0.01) = 0.01 · e^(−0.0025)
        let expect = 0.01 * (-0.0025f64).exp();
        assert_relative_eq!(b.linear_tracking, expect, epsilon = 1e-18);
        assert!((b.linear_tracking - 0.0099750).abs() < 1e-7);
    }

    #[test]
    fn joint_power_sums_absolute_products() {
        let mut s = StepState::zeroed(0.01);
        s.q_dot = [1.0; 8];
        s.tau = [0.5; 8];
        let w = RewardWeights { alpha2: 1.0, ..RewardWeights::default() };
        let b = reward_step(&s, &CommandProfile::default(), &w).unwrap();
        assert_relative_eq!(b.user_joint_power, 4.0, epsilon = 1e-15);
        // Signs do not cancel.
        s.tau = [0.5, -0.5, 0.5, -0.5, 0.5, -0.5, 0.5, -0.5];
        let b = reward_step(&s, &CommandProfile::default(), &w).unwrap();
        assert_relative_eq!(b.user_joint_power, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn air_time_credits_only_at_touchdown() {
        let mut s = StepState::zeroed(0.01);
        s.t_air = [0.7, 0.3, 0.0, 0.0];
        s.foot_contact = [true, false, true, false];
        let b = reward_step(&s, &CommandProfile::default(), &RewardWeights::default()).unwrap();
        // Only foot 0 is a touchdown (contact with completed air time):
        // 0.1 · dt · (0.7 − 0.5).
        assert_relative_eq!(b.feet_air_time, 0.1 * 0.01 * 0.2, epsilon = 1e-15);
    }

    #[test]
    fn stance_time_credits_only_at_liftoff() {
        let mut s = StepState::zeroed(0.01);
        s.t_stance = [0.0, 0.4, 0.9, 0.0];
        s.foot_contact = [true, false, false, false];
        let b = reward_step(&s, &CommandProfile::default(), &RewardWeights::default()).unwrap();
        // Feet 1 and 2 lift off: 0.1 · dt · ((0.4 − 0.5) + (0.9 − 0.5)).
        assert_relative_eq!(b.feet_stance_time, 0.1 * 0.01 * 0.3, epsilon = 1e-15);
    }

    #[test]
    fn total_is_the_exact_term_sum() {
        let mut s = StepState::zeroed(0.02);
        s.v = Vector3::new(0.21, -0.04, 0.03);
        s.omega = Vector3::new(0.4, -0.2, 0.9);
        s.q_dot = [0.3, -0.2, 0.5, 0.1, -0.6, 0.2, 0.0, 0.4];
        s.tau = [1.2, -0.8, 0.5, 2.0, -1.5, 0.3, 0.9, -0.1];
        s.q_ddot = [10.0, -5.0, 3.0, 8.0, -2.0, 1.0, 0.0, 4.0];
        s.a = [0.1; 8];
        s.a_prev = [0.05; 8];
        s.g_b = Vector3::new(0.1, -0.2, -0.9746794344808963).normalize();
        let w = RewardWeights { alpha1: 0.7, alpha2: -0.04, ..RewardWeights::default() };
        let b = reward_step(&s, &CommandProfile::default(), &w).unwrap();
        let sum: f64 = b.terms().iter().sum();
        assert!((b.total - sum).abs() <= 1e-12 * b.total.abs().max(1.0));
    }

    #[test]
    fn non_finite_state_is_an_evaluation_error() {
        let mut s = StepState::zeroed(0.01);
        s.tau[3] = f64::NAN;
        let err = reward_step(&s, &CommandProfile::default(), &RewardWeights::default())
            .unwrap_err();
        assert!(matches!(err, Error::Evaluation(_)));
    }
}
