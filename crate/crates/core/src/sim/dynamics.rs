//! Mass matrix, bias forces, contact forces, and the substep integrator.

use nalgebra::{DMatrix, DVector, Point3, UnitQuaternion, Vector3};

use super::model::{forward_kinematics, Kinematics, SimModel, SimState};
use super::SimConfig;
use crate::error::{Error, Result};

/// Accumulates a world-frame force `f` applied at point `p` of `body` into
/// the generalized force vector.
fn apply_point_force(
    q_gen: &mut DVector<f64>,
    model: &SimModel,
    kin: &Kinematics,
    body: usize,
    p: &Point3<f64>,
    f: &Vector3<f64>,
) {
    let r0 = p - kin.com[0];
    q_gen[0] += f.x;
    q_gen[1] += f.y;
    q_gen[2] += f.z;
    let m0 = r0.cross(f);
    q_gen[3] += m0.x;
    q_gen[4] += m0.y;
    q_gen[5] += m0.z;
    for &j in &model.path_joints(body) {
        let lever = kin.joint_axis[j].cross(&(p - kin.joint_origin[j]));
        q_gen[6 + j] += lever.dot(f);
    }
}

/// Accumulates a world-frame pure torque on `body`.
fn apply_body_torque(
    q_gen: &mut DVector<f64>,
    model: &SimModel,
    kin: &Kinematics,
    body: usize,
    t: &Vector3<f64>,
) {
    q_gen[3] += t.x;
    q_gen[4] += t.y;
    q_gen[5] += t.z;
    for &j in &model.path_joints(body) {
        q_gen[6 + j] += kin.joint_axis[j].dot(t);
    }
}

fn mass_matrix(model: &SimModel, kin: &Kinematics) -> DMatrix<f64> {
    let n = model.dof();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, body) in model.bodies.iter().enumerate() {
        let mass = body.mass;
        let iw = &kin.inertia_world[i];
        let r = kin.com[i] - kin.com[0];
        let path = model.path_joints(i);

        // vv block: m·I₃
        for k in 0..3 {
            m[(k, k)] += mass;
        }
        // vω: −m·skew(r); ωω: m(|r|²I − rrᵀ) + I_w
        let skew = skew3(&r);
        for a in 0..3 {
            for b in 0..3 {
                m[(a, 3 + b)] += -mass * skew[(a, b)];
                m[(3 + a, b)] += -mass * skew[(b, a)];
                m[(3 + a, 3 + b)] += mass
                    * (if a == b { r.norm_squared() } else { 0.0 } - r[a] * r[b])
                    + iw[(a, b)];
            }
        }
        for &j in &path {
            let vj = kin.joint_axis[j].cross(&(kin.com[i] - kin.joint_origin[j]));
            let aj = kin.joint_axis[j];
            // vθ and ωθ couplings.
            let omega_coupling = r.cross(&vj) * mass + iw * aj;
            for k in 0..3 {
                m[(k, 6 + j)] += mass * vj[k];
                m[(6 + j, k)] += mass * vj[k];
                m[(3 + k, 6 + j)] += omega_coupling[k];
                m[(6 + j, 3 + k)] += omega_coupling[k];
            }
            // θθ block over path pairs.
            for &l in &path {
                let vl = kin.joint_axis[l].cross(&(kin.com[i] - kin.joint_origin[l]));
                let al = kin.joint_axis[l];
                m[(6 + j, 6 + l)] += mass * vj.dot(&vl) + aj.dot(&(iw * al));
            }
        }
    }
    m
}

fn skew3(v: &Vector3<f64>) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Velocity-product (Coriolis/centrifugal/gyroscopic) generalized forces,
/// i.e. the C(q,u) the solver subtracts from applied forces.
fn bias_forces(model: &SimModel, kin: &Kinematics, state: &SimState) -> DVector<f64> {
    let n = model.dof();
    let mut c = DVector::<f64>::zeros(n);
    for (i, body) in model.bodies.iter().enumerate() {
        let path = model.path_joints(i);
        // Bias accelerations with u̇ = 0.
        let mut omega_dot = Vector3::zeros();
        let mut v_dot = state.omega0.cross(&(kin.v_com[i] - kin.v_com[0]));
        for &j in &path {
            let pred = model.joints[j].parent_body;
            let a = kin.joint_axis[j];
            let a_dot = kin.omega[pred].cross(&a);
            let o_dot = kin.v_com[pred]
                + kin.omega[pred].cross(&(kin.joint_origin[j] - kin.com[pred]));
            omega_dot += state.theta_dot[j] * a_dot;
            v_dot += state.theta_dot[j]
                * (a_dot.cross(&(kin.com[i] - kin.joint_origin[j]))
                    + a.cross(&(kin.v_com[i] - o_dot)));
        }
        let f = v_dot * body.mass;
        apply_point_force(&mut c, model, kin, i, &kin.com[i], &f);
        let gyro = kin.inertia_world[i] * omega_dot
            + kin.omega[i].cross(&(kin.inertia_world[i] * kin.omega[i]));
        apply_body_torque(&mut c, model, kin, i, &gyro);
    }
    c
}

/// Contact forces for the current kinematics. Returns the generalized
/// force contribution and per-foot normal force sums.
///
/// Gains are split across a body's penetrating points so the aggregate
/// stiffness/damping per body stays at the configured values regardless of
/// how densely its surface was sampled — explicit penalty damping is only
/// stable while `d·h < m`, and the lower legs weigh well under 0.1 kg.
fn contact_forces(
    q_gen: &mut DVector<f64>,
    model: &SimModel,
    kin: &Kinematics,
    cfg: &SimConfig,
) -> [f64; 4] {
    let mut foot_normal = [0.0; 4];
    if !cfg.contacts_enabled {
        return foot_normal;
    }
    let cp = &cfg.contact;
    for (i, body) in model.bodies.iter().enumerate() {
        let active = body
            .contacts_local
            .iter()
            .filter(|l| kin.body_pose[i].transform_point(l).z < 0.0)
            .count();
        if active == 0 {
            continue;
        }
        let share = 1.0 / active as f64;
        for local in &body.contacts_local {
            let p = kin.body_pose[i].transform_point(local);
            if p.z >= 0.0 {
                continue;
            }
            let v_p = kin.v_com[i] + kin.omega[i].cross(&(p - kin.com[i]));
            let fz = (cp.kn * (-p.z) - cp.dn * v_p.z) * share;
            if fz <= 0.0 {
                continue;
            }
            let vt = Vector3::new(v_p.x, v_p.y, 0.0);
            let coef = (cp.mu * fz / (vt.norm() + 1e-9)).min(cp.kt * share);
            let f = Vector3::new(-coef * vt.x, -coef * vt.y, fz);
            apply_point_force(q_gen, model, kin, i, &p, &f);
            if let Some(k) = body.foot {
                foot_normal[k] += fz;
            }
        }
    }
    foot_normal
}

/// Generalized acceleration under explicit joint torques (no PD, no limit
/// springs). Exposed for dynamics verification.
pub fn compute_udot(
    model: &SimModel,
    state: &SimState,
    joint_tau: &[f64],
    cfg: &SimConfig,
) -> Result<DVector<f64>> {
    let kin = forward_kinematics(model, state);
    let n = model.dof();
    let mut q_gen = DVector::<f64>::zeros(n);
    let g = Vector3::new(0.0, 0.0, -cfg.gravity);
    for (i, body) in model.bodies.iter().enumerate() {
        let f = g * body.mass;
        apply_point_force(&mut q_gen, model, &kin, i, &kin.com[i], &f);
    }
    contact_forces(&mut q_gen, model, &kin, cfg);
    for (j, &tau) in joint_tau.iter().enumerate() {
        q_gen[6 + j] += tau;
    }
    q_gen -= bias_forces(model, &kin, state);

    let mut m = mass_matrix(model, &kin);
    if cfg.fixed_base {
        for k in 0..6 {
            for c in 0..n {
                m[(k, c)] = 0.0;
                m[(c, k)] = 0.0;
            }
            m[(k, k)] = 1.0;
            q_gen[k] = 0.0;
        }
    }
    m.clone()
        .cholesky()
        .map(|ch| ch.solve(&q_gen))
        .or_else(|| m.lu().solve(&q_gen))
        .ok_or_else(|| Error::Evaluation("singular mass matrix".into()))
}

/// PD torques for the current state, clamped to the effort limits.
pub fn pd_torques(model: &SimModel, state: &SimState, q_star: &[f64], cfg: &SimConfig) -> Vec<f64> {
    model
        .joints
        .iter()
        .enumerate()
        .map(|(j, joint)| {
            let raw = cfg.kp * (q_star[j] - state.theta[j]) - cfg.kd * state.theta_dot[j];
            raw.clamp(-joint.limits.effort, joint.limits.effort)
        })
        .collect()
}

/// One physics substep of length `h` toward targets `q_star`: clamped PD
/// torques plus limit springs and structural damping, then semi-implicit
/// Euler. Returns (PD torques, per-foot normal impulses).
pub fn step_substep(
    model: &SimModel,
    state: &mut SimState,
    q_star: &[f64],
    cfg: &SimConfig,
    h: f64,
) -> Result<(Vec<f64>, [f64; 4])> {
    let kin = forward_kinematics(model, state);
    let n = model.dof();
    let mut q_gen = DVector::<f64>::zeros(n);

    let g = Vector3::new(0.0, 0.0, -cfg.gravity);
    for (i, body) in model.bodies.iter().enumerate() {
        let f = g * body.mass;
        apply_point_force(&mut q_gen, model, &kin, i, &kin.com[i], &f);
    }
    let foot_normal = contact_forces(&mut q_gen, model, &kin, cfg);

    let tau_pd = pd_torques(model, state, q_star, cfg);
    for (j, joint) in model.joints.iter().enumerate() {
        let over = (state.theta[j] - joint.limits.upper).max(0.0);
        let under = (joint.limits.lower - state.theta[j]).max(0.0);
        let tau_limit = cfg.joint_limit_stiffness * (under - over);
        q_gen[6 + j] += tau_pd[j] + tau_limit - cfg.joint_damping * state.theta_dot[j];
    }

    q_gen -= bias_forces(model, &kin, state);

    let mut m = mass_matrix(model, &kin);
    if cfg.fixed_base {
        for k in 0..6 {
            for c in 0..n {
                m[(k, c)] = 0.0;
                m[(c, k)] = 0.0;
            }
            m[(k, k)] = 1.0;
            q_gen[k] = 0.0;
        }
    }
    let udot = m
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&q_gen))
        .or_else(|| m.lu().solve(&q_gen))
        .ok_or_else(|| Error::Evaluation("singular mass matrix".into()))?;

    // Semi-implicit Euler: velocities first, then poses with the new
    // velocities.
    state.v_com0 += Vector3::new(udot[0], udot[1], udot[2]) * h;
    state.omega0 += Vector3::new(udot[3], udot[4], udot[5]) * h;
    for j in 0..model.joints.len() {
        state.theta_dot[j] += udot[6 + j] * h;
        state.theta[j] += state.theta_dot[j] * h;
    }
    let t = Point3::from(state.base_pose.translation.vector);
    let v_origin = state.v_com0 + state.omega0.cross(&(t - kin.com[0]));
    state.base_pose.translation.vector += v_origin * h;
    let dq = UnitQuaternion::from_scaled_axis(state.omega0 * h);
    state.base_pose.rotation =
        UnitQuaternion::new_normalize((dq * state.base_pose.rotation).into_inner());

    Ok((tau_pd, foot_normal))
}
