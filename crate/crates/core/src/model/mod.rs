//! Kinetic robot model: links, joints, electronics, URDF export, and the
//! augmented variant bank.
//!
//! A model is 9 links (base + 4 upper + 4 lower legs) joined by 8 revolute
//! joints, with servo boxes at every joint and one core electronics box in
//! the base. Link meshes are kept in the canonical world frame; frames are
//! resolved at export and simulation time. The base link frame is rotated
//! so its +x is the facing direction (+y of the canonical mesh frame), the
//! usual robot convention.

mod urdf;
mod urdf_parse;
mod variants;

pub use urdf::{export_urdf, urdf_xml, write_link_meshes};
pub use urdf_parse::{parse_urdf, validate_urdf, UrdfJoint, UrdfLink, UrdfRobot};
pub use variants::{elongate_legs, generate_variant_bank, BankVariant, VariantBank, LEG_SCALE_STEP};

use nalgebra::{Isometry3, Matrix3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{mass_properties, MassProperties, TriangleMesh};
use crate::segmentation::{Axis, BodyPartition, JointKind, JointSpec, LegTag};

/// Joint position/velocity/torque limits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct JointLimits {
    /// rad
    pub lower: f64,
    /// rad
    pub upper: f64,
    /// rad/s
    pub velocity: f64,
    /// N·m
    pub effort: f64,
}

impl Default for JointLimits {
    fn default() -> Self {
        Self { lower: -1.57, upper: 1.57, velocity: 6.0, effort: 4.4 }
    }
}

/// A rigid electronics box.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoxSpec {
    /// Full side lengths, m.
    pub size: Vector3<f64>,
    /// kg
    pub mass: f64,
}

impl BoxSpec {
    /// Solid box inertia about its center, own axes.
    pub fn inertia(&self) -> Matrix3<f64> {
        let (x, y, z) = (self.size.x, self.size.y, self.size.z);
        let m = self.mass / 12.0;
        Matrix3::from_diagonal(&Vector3::new(
            m * (y * y + z * z),
            m * (x * x + z * z),
            m * (x * x + y * y),
        ))
    }
}

/// Electronics carried by the robot: one servo box per joint and a core
/// box (controller + battery) slid into the base link.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ElectronicsSpec {
    pub motor_box: BoxSpec,
    pub core_box: BoxSpec,
    /// Core box center relative to the base link's center of mass, m.
    pub core_offset: Vector3<f64>,
}

impl Default for ElectronicsSpec {
    fn default() -> Self {
        Self {
            motor_box: BoxSpec { size: Vector3::new(0.040, 0.040, 0.044), mass: 0.065 },
            core_box: BoxSpec { size: Vector3::new(0.090, 0.060, 0.045), mass: 0.55 },
            core_offset: Vector3::zeros(),
        }
    }
}

/// Assembly tunables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AssemblyConfig {
    pub name: String,
    /// Printed-shell effective density, kg/m³.
    pub density: f64,
    /// When set, density is re-derived so shells + electronics hit this
    /// total mass, kg.
    pub total_mass_target: Option<f64>,
    pub joint_limits: JointLimits,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self {
            name: "robot".into(),
            density: 300.0,
            total_mass_target: None,
            joint_limits: JointLimits::default(),
        }
    }
}

/// One rigid link: name, world-frame mesh, and its mass properties.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkModel {
    pub name: String,
    pub mesh: TriangleMesh,
    pub props: MassProperties,
}

/// One revolute joint between two links.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointModel {
    pub name: String,
    /// Index into `links`.
    pub parent: usize,
    pub child: usize,
    pub spec: JointSpec,
    pub limits: JointLimits,
}

/// The articulated robot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KineticRobotModel {
    pub name: String,
    /// base, then per leg (FL, FR, RL, RR): upper, lower.
    pub links: Vec<LinkModel>,
    /// Per leg: shoulder then knee, leg order as above.
    pub joints: Vec<JointModel>,
    pub electronics: ElectronicsSpec,
    pub density: f64,
}

pub const BASE_LINK: usize = 0;

impl KineticRobotModel {
    pub fn upper_link(tag: LegTag) -> usize {
        1 + 2 * tag.index()
    }

    pub fn lower_link(tag: LegTag) -> usize {
        2 + 2 * tag.index()
    }

    pub fn shoulder_joint(tag: LegTag) -> usize {
        2 * tag.index()
    }

    pub fn knee_joint(tag: LegTag) -> usize {
        2 * tag.index() + 1
    }

    /// Base link frame in world coordinates: +x facing (world +y), +z up,
    /// origin at the world origin (ground center).
    pub fn base_pose(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2),
        )
    }

    /// World pose of a joint frame.
    pub fn joint_world_pose(&self, j: usize) -> Isometry3<f64> {
        let spec = &self.joints[j].spec;
        Isometry3::from_parts(
            Translation3::from(spec.origin.coords),
            UnitQuaternion::from_rotation_matrix(&spec.frame),
        )
    }

    /// World pose of a link's own frame (the base frame for the base, the
    /// parent joint frame for limbs).
    pub fn link_frame(&self, link: usize) -> Isometry3<f64> {
        if link == BASE_LINK {
            self.base_pose()
        } else {
            let j = self
                .joints
                .iter()
                .position(|jm| jm.child == link)
                .expect("every non-base link is some joint's child");
            self.joint_world_pose(j)
        }
    }

    /// Total robot mass: links plus all electronics.
    pub fn total_mass(&self) -> f64 {
        let shells: f64 = self.links.iter().map(|l| l.props.mass).sum();
        shells
            + self.joints.len() as f64 * self.electronics.motor_box.mass
            + self.electronics.core_box.mass
    }

    /// World-frame pose of the motor box serving joint `j` (at the joint
    /// origin, joint-frame axes).
    pub fn motor_pose(&self, j: usize) -> Isometry3<f64> {
        self.joint_world_pose(j)
    }

    /// World-frame pose of the core electronics box.
    pub fn core_pose(&self) -> Isometry3<f64> {
        let base_com = self.links[BASE_LINK].props.center_of_mass;
        Isometry3::from_parts(
            Translation3::from(base_com.coords + self.electronics.core_offset),
            self.base_pose().rotation,
        )
    }

    /// Mass properties of link `link` with its attached electronics lumped
    /// in (motor boxes lump into the joint's parent link, the core box
    /// into the base). Returned about the combined COM, world axes.
    pub fn body_mass_properties(&self, link: usize) -> (f64, Point3<f64>, Matrix3<f64>) {
        let mut parts: Vec<(f64, Point3<f64>, Matrix3<f64>)> = Vec::new();
        let p = &self.links[link].props;
        parts.push((p.mass, p.center_of_mass, p.inertia_tensor));
        for (j, joint) in self.joints.iter().enumerate() {
            if joint.parent == link {
                let pose = self.motor_pose(j);
                let b = &self.electronics.motor_box;
                let r = pose.rotation.to_rotation_matrix();
                parts.push((
                    b.mass,
                    Point3::from(pose.translation.vector),
                    r.matrix() * b.inertia() * r.matrix().transpose(),
                ));
            }
        }
        if link == BASE_LINK {
            let pose = self.core_pose();
            let b = &self.electronics.core_box;
            let r = pose.rotation.to_rotation_matrix();
            parts.push((
                b.mass,
                Point3::from(pose.translation.vector),
                r.matrix() * b.inertia() * r.matrix().transpose(),
            ));
        }
        combine_mass(&parts)
    }

    /// Tree sanity: 9 links, 8 joints, base-rooted, unique children.
    pub fn validate(&self) -> Result<()> {
        if self.links.len() != 9 || self.joints.len() != 8 {
            return Err(Error::Assembly(format!(
                "{} links / {} joints; expected 9 / 8",
                self.links.len(),
                self.joints.len()
            )));
        }
        let mut seen_child = vec![false; self.links.len()];
        for j in &self.joints {
            if j.parent >= self.links.len() || j.child >= self.links.len() {
                return Err(Error::Assembly(format!("joint {} references a missing link", j.name)));
            }
            if seen_child[j.child] || j.child == BASE_LINK {
                return Err(Error::Assembly(format!("link {} has two parents", j.child)));
            }
            seen_child[j.child] = true;
            j.spec.validate()?;
        }
        // Parent of every knee must itself hang off the base.
        for tag in LegTag::ALL {
            let sh = &self.joints[Self::shoulder_joint(tag)];
            let kn = &self.joints[Self::knee_joint(tag)];
            if sh.parent != BASE_LINK || kn.parent != sh.child {
                return Err(Error::Assembly(format!("{} joint wiring is broken", tag.name())));
            }
        }
        Ok(())
    }
}

/// Combines point-mass-properties tuples (mass, com, inertia about com)
/// into one about the combined COM.
fn combine_mass(parts: &[(f64, Point3<f64>, Matrix3<f64>)]) -> (f64, Point3<f64>, Matrix3<f64>) {
    let mass: f64 = parts.iter().map(|p| p.0).sum();
    let com = Point3::from(
        parts
            .iter()
            .fold(Vector3::zeros(), |acc, (m, c, _)| acc + c.coords * *m)
            / mass,
    );
    let mut inertia = Matrix3::zeros();
    for (m, c, i) in parts {
        let d = c - com;
        inertia += i + (Matrix3::identity() * d.norm_squared() - d * d.transpose()) * *m;
    }
    (mass, com, inertia)
}

/// Builds the kinetic model from a body partition.
///
/// Joints wire base→upper at the shoulders and upper→lower at the knees.
/// When `total_mass_target` is set, the shell density is re-derived so the
/// printed shells plus electronics reproduce it.
pub fn assemble(
    partition: &BodyPartition,
    electronics: &ElectronicsSpec,
    config: &AssemblyConfig,
) -> Result<KineticRobotModel> {
    if partition.legs.len() != 4 {
        return Err(Error::Assembly(format!(
            "partition has {} legs; need 4",
            partition.legs.len()
        )));
    }

    let mut density = config.density;
    if let Some(target) = config.total_mass_target {
        let electronics_mass = 8.0 * electronics.motor_box.mass + electronics.core_box.mass;
        let shell_volume: f64 = std::iter::once(&partition.base_link)
            .chain(partition.legs.iter().flat_map(|l| [&l.upper, &l.lower]))
            .map(|m| m.signed_volume())
            .sum();
        if target <= electronics_mass || shell_volume <= 0.0 {
            return Err(Error::Assembly(format!(
                "total mass target {target} kg is not above the electronics mass \
                 {electronics_mass} kg"
            )));
        }
        density = (target - electronics_mass) / shell_volume;
    }

    let mut links = Vec::with_capacity(9);
    links.push(LinkModel {
        name: "base".into(),
        props: mass_properties(&partition.base_link, density)?,
        mesh: partition.base_link.clone(),
    });
    let mut joints = Vec::with_capacity(8);
    for tag in LegTag::ALL {
        let leg = partition.leg(tag);
        if leg.shoulder.kind != JointKind::Shoulder || leg.knee.kind != JointKind::Knee {
            return Err(Error::Assembly(format!("{}: joint kinds are swapped", tag.name())));
        }
        let upper_idx = links.len();
        links.push(LinkModel {
            name: format!("{}_upper", tag.name()),
            props: mass_properties(&leg.upper, density)?,
            mesh: leg.upper.clone(),
        });
        let lower_idx = links.len();
        links.push(LinkModel {
            name: format!("{}_lower", tag.name()),
            props: mass_properties(&leg.lower, density)?,
            mesh: leg.lower.clone(),
        });
        joints.push(JointModel {
            name: format!("{}_shoulder", tag.name()),
            parent: BASE_LINK,
            child: upper_idx,
            spec: leg.shoulder,
            limits: config.joint_limits,
        });
        joints.push(JointModel {
            name: format!("{}_knee", tag.name()),
            parent: upper_idx,
            child: lower_idx,
            spec: leg.knee,
            limits: config.joint_limits,
        });
    }

    let model = KineticRobotModel {
        name: config.name.clone(),
        links,
        joints,
        electronics: electronics.clone(),
        density,
    };
    model.validate()?;

    // The core box must fit inside the base link's bounding box.
    let (bmin, bmax) = model.links[BASE_LINK].mesh.bounding_box().unwrap();
    let core = model.core_pose().translation.vector;
    let half = electronics.core_box.size / 2.0;
    for k in 0..3 {
        if core[k] - half[k] < bmin[k] - 1e-9 || core[k] + half[k] > bmax[k] + 1e-9 {
            return Err(Error::Assembly(format!(
                "core box does not fit the base link on axis {k}: \
                 [{:.3}, {:.3}] outside [{:.3}, {:.3}]",
                core[k] - half[k],
                core[k] + half[k],
                bmin[k],
                bmax[k]
            )));
        }
    }
    Ok(model)
}

/// Shared mass-properties frame change: express `props` (world axes) in
/// the frame `iso` (frame→world).
pub(crate) fn props_in_frame(
    props: &MassProperties,
    iso: &Isometry3<f64>,
) -> (Point3<f64>, Matrix3<f64>) {
    let inv = iso.inverse();
    let com = inv.transform_point(&props.center_of_mass);
    let r = inv.rotation.to_rotation_matrix();
    let inertia = r.matrix() * props.inertia_tensor * r.matrix().transpose();
    (com, inertia)
}

/// Deterministic per-model axis relabeling: sets every joint's rotation
/// axis to `axis`.
pub fn set_global_axis(model: &mut KineticRobotModel, axis: Axis) {
    for j in &mut model.joints {
        j.spec.rotation_axis = axis;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::{segment, orient_canonical, SegmentationConfig, UpAxis};
    use crate::shapes::{synthetic_quadruped, QuadrupedParams};
    use approx::assert_relative_eq;

    pub(crate) fn test_partition() -> BodyPartition {
        let raw = synthetic_quadruped(&QuadrupedParams::default());
        let (mesh, _) = orient_canonical(&raw, UpAxis::Z).unwrap();
        let mesh = crate::mesh::scale_to_volume(&mesh, 6.3e-3).unwrap();
        let (partition, _) = segment(&mesh, &SegmentationConfig::default()).unwrap();
        partition
    }

    #[test]
    fn assembled_model_has_expected_shape() {
        let partition = test_partition();
        let model =
            assemble(&partition, &ElectronicsSpec::default(), &AssemblyConfig::default()).unwrap();
        assert_eq!(model.links.len(), 9);
        assert_eq!(model.joints.len(), 8);
        model.validate().unwrap();
        // Tree depth 2: shoulders hang off base, knees off uppers.
        for tag in LegTag::ALL {
            let sh = &model.joints[KineticRobotModel::shoulder_joint(tag)];
            assert_eq!(sh.parent, BASE_LINK);
            let kn = &model.joints[KineticRobotModel::knee_joint(tag)];
            assert_eq!(kn.parent, sh.child);
        }
    }

    #[test]
    fn total_mass_is_the_exact_sum() {
        let partition = test_partition();
        let e = ElectronicsSpec::default();
        let model = assemble(&partition, &e, &AssemblyConfig::default()).unwrap();
        let shells: f64 = model.links.iter().map(|l| l.props.mass).sum();
        let expect = shells + 8.0 * e.motor_box.mass + e.core_box.mass;
        assert_relative_eq!(model.total_mass(), expect, epsilon = 1e-15);
    }

    #[test]
    fn missing_leg_is_an_assembly_error() {
        let mut partition = test_partition();
        partition.legs.pop();
        let err = assemble(&partition, &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Assembly(_)));
    }

    #[test]
    fn mass_target_rederives_density() {
        let partition = test_partition();
        let e = ElectronicsSpec::default();
        let cfg = AssemblyConfig { total_mass_target: Some(3.0), ..AssemblyConfig::default() };
        let model = assemble(&partition, &e, &cfg).unwrap();
        assert_relative_eq!(model.total_mass(), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn combine_mass_matches_direct_integration() {
        // Two half cubes combined must equal the whole cube.
        let left = crate::shapes::cuboid(Vector3::new(0.25, 0.5, 0.5))
            .translated(Vector3::new(-0.25, 0.0, 0.0));
        let right = crate::shapes::cuboid(Vector3::new(0.25, 0.5, 0.5))
            .translated(Vector3::new(0.25, 0.0, 0.0));
        let lp = mass_properties(&left, 700.0).unwrap();
        let rp = mass_properties(&right, 700.0).unwrap();
        let (m, com, inertia) = combine_mass(&[
            (lp.mass, lp.center_of_mass, lp.inertia_tensor),
            (rp.mass, rp.center_of_mass, rp.inertia_tensor),
        ]);
        let whole = mass_properties(&crate::shapes::cube(1.0), 700.0).unwrap();
        assert_relative_eq!(m, whole.mass, max_relative = 1e-12);
        assert_relative_eq!((com - whole.center_of_mass).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(
            (inertia - whole.inertia_tensor).norm(),
            0.0,
            epsilon = 1e-9 * whole.inertia_tensor.norm()
        );
    }
}
