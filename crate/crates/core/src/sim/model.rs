//! Simulation-ready robot description precomputed from a kinetic model:
//! link-local mass properties (electronics lumped into their parents),
//! joint frames, and deterministic contact point sets.

use nalgebra::{Isometry3, Matrix3, Point3, UnitQuaternion, Vector3};

use super::SimConfig;
use crate::model::{JointLimits, KineticRobotModel};
use crate::segmentation::LegTag;

/// One rigid body (a link with its attached electronics).
#[derive(Debug, Clone)]
pub struct SimBody {
    pub mass: f64,
    /// COM in the link frame.
    pub com_local: Point3<f64>,
    /// Inertia about the COM, link-frame axes.
    pub inertia_local: Matrix3<f64>,
    /// Contact points, link frame.
    pub contacts_local: Vec<Point3<f64>>,
    /// Foot index 0..4 when this body is a lower leg.
    pub foot: Option<usize>,
    /// Joint whose child frame this body's frame is; None for the base.
    pub parent_joint: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SimJoint {
    pub parent_body: usize,
    pub child_body: usize,
    /// Parent link frame → joint frame at zero angle.
    pub x_parent: Isometry3<f64>,
    /// Rotation axis in the joint (child) frame, unit.
    pub axis_local: Vector3<f64>,
    pub limits: JointLimits,
}

/// Precomputed simulation model.
#[derive(Debug, Clone)]
pub struct SimModel {
    pub bodies: Vec<SimBody>,
    pub joints: Vec<SimJoint>,
    /// Reference world pose of the base frame (spawn orientation).
    pub base_pose_ref: Isometry3<f64>,
}

impl SimModel {
    pub fn from_model(model: &KineticRobotModel, config: &SimConfig) -> Self {
        let mut bodies = Vec::with_capacity(model.links.len());
        for (idx, link) in model.links.iter().enumerate() {
            let frame = model.link_frame(idx);
            let inv = frame.inverse();
            let (mass, com_w, inertia_w) = model.body_mass_properties(idx);
            let com_local = inv.transform_point(&com_w);
            let r = inv.rotation.to_rotation_matrix();
            let inertia_local = r.matrix() * inertia_w * r.matrix().transpose();

            let contacts_local =
                select_contacts(&link.mesh, &frame, config.contact_points_per_link);
            let foot = LegTag::ALL
                .iter()
                .position(|&tag| KineticRobotModel::lower_link(tag) == idx);
            let parent_joint = model.joints.iter().position(|j| j.child == idx);
            bodies.push(SimBody { mass, com_local, inertia_local, contacts_local, foot, parent_joint });
        }
        let joints = model
            .joints
            .iter()
            .enumerate()
            .map(|(j, joint)| SimJoint {
                parent_body: joint.parent,
                child_body: joint.child,
                x_parent: model.link_frame(joint.parent).inverse() * model.joint_world_pose(j),
                axis_local: joint.spec.rotation_axis.unit(),
                limits: joint.limits,
            })
            .collect();
        SimModel { bodies, joints, base_pose_ref: model.base_pose() }
    }

    /// Joints on the path from the base to `body`, in base→leaf order.
    pub fn path_joints(&self, body: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = body;
        while let Some(j) = self.bodies[cur].parent_joint {
            path.push(j);
            cur = self.joints[j].parent_body;
        }
        path.reverse();
        path
    }

    pub fn dof(&self) -> usize {
        6 + self.joints.len()
    }
}

/// Mutable simulation state.
#[derive(Debug, Clone)]
pub struct SimState {
    /// World pose of the base link frame.
    pub base_pose: Isometry3<f64>,
    pub theta: Vec<f64>,
    /// World linear velocity of the base body's COM.
    pub v_com0: Vector3<f64>,
    /// World angular velocity of the base.
    pub omega0: Vector3<f64>,
    pub theta_dot: Vec<f64>,
}

impl SimState {
    pub fn at_rest(model: &SimModel, theta: &[f64]) -> Self {
        Self {
            base_pose: model.base_pose_ref,
            theta: theta.to_vec(),
            v_com0: Vector3::zeros(),
            omega0: Vector3::zeros(),
            theta_dot: vec![0.0; model.joints.len()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.base_pose.translation.vector.iter().all(|x| x.is_finite())
            && self.base_pose.rotation.coords.iter().all(|x| x.is_finite())
            && self.v_com0.iter().all(|x| x.is_finite())
            && self.omega0.iter().all(|x| x.is_finite())
            && self.theta.iter().chain(&self.theta_dot).all(|x| x.is_finite())
    }
}

/// Per-body world-frame kinematics for one instant.
#[derive(Debug, Clone)]
pub struct Kinematics {
    pub body_pose: Vec<Isometry3<f64>>,
    pub com: Vec<Point3<f64>>,
    pub inertia_world: Vec<Matrix3<f64>>,
    pub omega: Vec<Vector3<f64>>,
    pub v_com: Vec<Vector3<f64>>,
    pub joint_origin: Vec<Point3<f64>>,
    pub joint_axis: Vec<Vector3<f64>>,
}

pub fn forward_kinematics(model: &SimModel, state: &SimState) -> Kinematics {
    let nb = model.bodies.len();
    let nj = model.joints.len();
    let mut k = Kinematics {
        body_pose: vec![Isometry3::identity(); nb],
        com: vec![Point3::origin(); nb],
        inertia_world: vec![Matrix3::zeros(); nb],
        omega: vec![Vector3::zeros(); nb],
        v_com: vec![Vector3::zeros(); nb],
        joint_origin: vec![Point3::origin(); nj],
        joint_axis: vec![Vector3::zeros(); nj],
    };
    k.body_pose[0] = state.base_pose;

    // Pose pass: joints are stored parent-before-child.
    for (j, joint) in model.joints.iter().enumerate() {
        let parent_pose = k.body_pose[joint.parent_body];
        let hinge = UnitQuaternion::from_axis_angle(
            &nalgebra::Unit::new_normalize(joint.axis_local),
            state.theta[j],
        );
        let joint_pose = parent_pose
            * joint.x_parent
            * Isometry3::from_parts(nalgebra::Translation3::identity(), hinge);
        k.body_pose[joint.child_body] = joint_pose;
        k.joint_origin[j] = Point3::from(joint_pose.translation.vector);
        // The hinge axis is fixed in both the joint frame and its parent.
        k.joint_axis[j] = (parent_pose * joint.x_parent).rotation * joint.axis_local;
    }

    for (i, body) in model.bodies.iter().enumerate() {
        let pose = k.body_pose[i];
        k.com[i] = pose.transform_point(&body.com_local);
        let r = pose.rotation.to_rotation_matrix();
        k.inertia_world[i] = r.matrix() * body.inertia_local * r.matrix().transpose();
    }

    // Velocity pass.
    for i in 0..nb {
        let mut omega = state.omega0;
        let mut v = state.v_com0 + state.omega0.cross(&(k.com[i] - k.com[0]));
        for &j in &model.path_joints(i) {
            let a = k.joint_axis[j];
            omega += state.theta_dot[j] * a;
            v += state.theta_dot[j] * a.cross(&(k.com[i] - k.joint_origin[j]));
        }
        k.omega[i] = omega;
        k.v_com[i] = v;
    }
    k
}

/// Deterministic contact-point selection: the lowest reference-world
/// vertex, then farthest-point sampling, all stored in the link frame.
fn select_contacts(
    mesh: &crate::mesh::TriangleMesh,
    frame: &Isometry3<f64>,
    cap: usize,
) -> Vec<Point3<f64>> {
    let inv = frame.inverse();
    let world: Vec<Point3<f64>> = mesh.vertices.clone();
    if world.is_empty() {
        return Vec::new();
    }
    let lowest = (0..world.len())
        .min_by(|&a, &b| world[a].z.total_cmp(&world[b].z))
        .unwrap();
    let mut chosen: Vec<usize> = vec![lowest];
    let mut dist: Vec<f64> = world
        .iter()
        .map(|p| (p - world[lowest]).norm_squared())
        .collect();
    while chosen.len() < cap.min(world.len()) {
        let far = (0..world.len())
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]))
            .unwrap();
        if dist[far] <= 1e-12 {
            break;
        }
        chosen.push(far);
        for (i, p) in world.iter().enumerate() {
            dist[i] = dist[i].min((p - world[far]).norm_squared());
        }
    }
    chosen.iter().map(|&i| inv.transform_point(&world[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble, AssemblyConfig, ElectronicsSpec};
    use crate::segmentation::{orient_canonical, segment, SegmentationConfig, UpAxis};
    use crate::shapes::{synthetic_quadruped, QuadrupedParams};

    fn creature_model() -> KineticRobotModel {
        let raw = synthetic_quadruped(&QuadrupedParams::default());
        let (mesh, _) = orient_canonical(&raw, UpAxis::Z).unwrap();
        let mesh = crate::mesh::scale_to_volume(&mesh, 6.3e-3).unwrap();
        let (partition, _) = segment(&mesh, &SegmentationConfig::default()).unwrap();
        assemble(&partition, &ElectronicsSpec::default(), &AssemblyConfig::default()).unwrap()
    }

    #[test]
    fn sim_model_shape_and_zero_pose_kinematics() {
        let model = creature_model();
        let sim = SimModel::from_model(&model, &SimConfig::default());
        assert_eq!(sim.bodies.len(), 9);
        assert_eq!(sim.joints.len(), 8);
        let state = SimState::at_rest(&sim, &[0.0; 8]);
        let k = forward_kinematics(&sim, &state);
        // At zero joint angles, every frame matches the reference model.
        for (j, _) in sim.joints.iter().enumerate() {
            let expect = model.joint_world_pose(j);
            assert!(
                (k.joint_origin[j].coords - expect.translation.vector).norm() < 1e-12,
                "joint {j} origin"
            );
        }
        for (i, _) in sim.bodies.iter().enumerate() {
            let (_, com_w, _) = model.body_mass_properties(i);
            assert!((k.com[i] - com_w).norm() < 1e-12, "body {i} com");
        }
        // Feet are tagged on the four lower links.
        let feet: Vec<usize> = sim.bodies.iter().filter_map(|b| b.foot).collect();
        assert_eq!(feet, vec![0, 1, 2, 3]);
    }

    #[test]
    fn velocity_of_rotating_base_matches_rigid_body_formula() {
        let model = creature_model();
        let sim = SimModel::from_model(&model, &SimConfig::default());
        let mut state = SimState::at_rest(&sim, &[0.0; 8]);
        state.omega0 = Vector3::new(0.3, -0.2, 0.8);
        state.v_com0 = Vector3::new(1.0, 0.0, 0.0);
        let k = forward_kinematics(&sim, &state);
        for i in 0..sim.bodies.len() {
            let expect = state.v_com0 + state.omega0.cross(&(k.com[i] - k.com[0]));
            assert!((k.v_com[i] - expect).norm() < 1e-12);
            assert!((k.omega[i] - state.omega0).norm() < 1e-12);
        }
    }
}
