//! Episode rollout: spawn the robot above the ground, track joint-position
//! targets with the PD loop, and record one [`StepState`] per control step.

use nalgebra::Isometry3;
use serde::{Deserialize, Serialize};

use super::dynamics::step_substep;
use super::model::{forward_kinematics, SimModel, SimState};
use super::SimConfig;
use crate::reward::{CommandProfile, StepState};

/// Recorded episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<StepState>,
    /// World pose of the base link frame per control step.
    pub base_poses: Vec<Isometry3<f64>>,
    pub failed: bool,
    pub failure: Option<String>,
}

impl Trajectory {
    /// Mean planar speed along the facing direction (base-frame x), m/s.
    pub fn mean_forward_velocity(&self) -> f64 {
        if self.states.is_empty() {
            return 0.0;
        }
        self.states.iter().map(|s| s.v.x).sum::<f64>() / self.states.len() as f64
    }

    fn failed_marker(reason: String) -> Self {
        Trajectory { states: Vec::new(), base_poses: Vec::new(), failed: true, failure: Some(reason) }
    }
}

/// Runs an episode driving the joints toward `targets(step, time)`.
/// Deterministic: no randomness enters the physics.
pub fn rollout_with_targets(
    model: &SimModel,
    command: &CommandProfile,
    cfg: &SimConfig,
    mut targets: impl FnMut(usize, f64) -> [f64; 8],
) -> Trajectory {
    let steps = (command.duration / cfg.control_dt).round().max(1.0) as usize;
    let nj = model.joints.len();
    debug_assert_eq!(nj, 8, "locomotion rollouts expect the 8-joint robot");

    // Spawn at the initial targets, feet just above the ground.
    let q0 = targets(0, 0.0);
    let mut state = SimState::at_rest(model, &q0[..nj]);
    if cfg.contacts_enabled {
        let kin = forward_kinematics(model, &state);
        let mut min_z = f64::INFINITY;
        for (i, body) in model.bodies.iter().enumerate() {
            for local in &body.contacts_local {
                min_z = min_z.min(kin.body_pose[i].transform_point(local).z);
            }
        }
        if min_z.is_finite() {
            state.base_pose.translation.vector.z += cfg.spawn_clearance - min_z;
        }
    }

    let h = cfg.control_dt / cfg.substeps as f64;
    let mut states = Vec::with_capacity(steps);
    let mut base_poses = Vec::with_capacity(steps);
    let mut prev_theta_dot = state.theta_dot.clone();
    let mut prev_action = q0;
    let mut air = [0.0f64; 4];
    let mut stance = [0.0f64; 4];

    for step in 0..steps {
        let t = step as f64 * cfg.control_dt;
        let q_star = targets(step, t);

        let mut tau_first: Option<Vec<f64>> = None;
        let mut foot_impulse = [0.0f64; 4];
        for _ in 0..cfg.substeps {
            match step_substep(model, &mut state, &q_star, cfg, h) {
                Ok((tau, normals)) => {
                    if tau_first.is_none() {
                        tau_first = Some(tau);
                    }
                    for k in 0..4 {
                        foot_impulse[k] += normals[k] * h;
                    }
                }
                Err(e) => return Trajectory::failed_marker(e.to_string()),
            }
        }
        if !state.is_finite() {
            return Trajectory::failed_marker("non-finite state".into());
        }
        if state.v_com0.norm() > cfg.abort_speed {
            return Trajectory::failed_marker(format!(
                "base speed {:.1} m/s exceeds the abort limit",
                state.v_com0.norm()
            ));
        }

        let contact: [bool; 4] = std::array::from_fn(|k| foot_impulse[k] > 0.0);
        // One accumulator runs per foot; the other field carries the
        // completed duration exactly once at the step its phase ends.
        let mut t_air = [0.0f64; 4];
        let mut t_stance = [0.0f64; 4];
        for k in 0..4 {
            if contact[k] {
                stance[k] += cfg.control_dt;
                t_stance[k] = stance[k];
                if air[k] > 0.0 {
                    t_air[k] = air[k]; // touchdown: report the air phase
                    air[k] = 0.0;
                }
            } else {
                air[k] += cfg.control_dt;
                t_air[k] = air[k];
                if stance[k] > 0.0 {
                    t_stance[k] = stance[k]; // liftoff: report the stance
                    stance[k] = 0.0;
                }
            }
        }

        let rot_inv = state.base_pose.rotation.inverse();
        let tau = tau_first.unwrap_or_else(|| vec![0.0; nj]);
        let mut s = StepState::zeroed(cfg.control_dt);
        s.v = rot_inv * state.v_com0;
        s.omega = rot_inv * state.omega0;
        for j in 0..nj.min(8) {
            s.q[j] = state.theta[j];
            s.q_dot[j] = state.theta_dot[j];
            s.q_ddot[j] = (state.theta_dot[j] - prev_theta_dot[j]) / cfg.control_dt;
            s.q_star[j] = q_star[j];
            s.tau[j] = tau[j];
            s.a[j] = q_star[j];
            s.a_prev[j] = prev_action[j];
        }
        s.g_b = rot_inv * -nalgebra::Vector3::z();
        s.foot_contact = contact;
        s.t_air = t_air;
        s.t_stance = t_stance;
        states.push(s);
        base_poses.push(state.base_pose);

        prev_theta_dot.clone_from(&state.theta_dot);
        prev_action = q_star;
    }

    Trajectory { states, base_poses, failed: false, failure: None }
}
