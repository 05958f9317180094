//! URDF 1.0 export.
//!
//! Link meshes are written in their link frames (the parent joint frame
//! for limbs, the base frame for the base), so every <visual>/<collision>
//! origin is the identity and joint <origin> elements carry the kinematics.
//! Electronics are exported as fixed-joint box links.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::Isometry3;

use super::{props_in_frame, BoxSpec, KineticRobotModel, BASE_LINK};
use crate::error::Result;
use crate::mesh::save_stl_binary;

fn fmt_vec(v: &nalgebra::Vector3<f64>) -> String {
    format!("{} {} {}", v.x, v.y, v.z)
}

fn fmt_origin(iso: &Isometry3<f64>) -> String {
    let (r, p, y) = iso.rotation.euler_angles();
    format!(
        "<origin xyz=\"{} {} {}\" rpy=\"{r} {p} {y}\"/>",
        iso.translation.x, iso.translation.y, iso.translation.z
    )
}

fn inertial_block(
    out: &mut String,
    mass: f64,
    com: &nalgebra::Point3<f64>,
    inertia: &nalgebra::Matrix3<f64>,
    indent: &str,
) {
    let _ = writeln!(out, "{indent}<inertial>");
    let _ = writeln!(
        out,
        "{indent}  <origin xyz=\"{} {} {}\" rpy=\"0 0 0\"/>",
        com.x, com.y, com.z
    );
    let _ = writeln!(out, "{indent}  <mass value=\"{mass}\"/>");
    let _ = writeln!(
        out,
        "{indent}  <inertia ixx=\"{}\" ixy=\"{}\" ixz=\"{}\" iyy=\"{}\" iyz=\"{}\" izz=\"{}\"/>",
        inertia[(0, 0)],
        inertia[(0, 1)],
        inertia[(0, 2)],
        inertia[(1, 1)],
        inertia[(1, 2)],
        inertia[(2, 2)]
    );
    let _ = writeln!(out, "{indent}</inertial>");
}

fn box_link(out: &mut String, name: &str, spec: &BoxSpec) {
    let _ = writeln!(out, "  <link name=\"{name}\">");
    let com = nalgebra::Point3::origin();
    inertial_block(out, spec.mass, &com, &spec.inertia(), "    ");
    for tag in ["visual", "collision"] {
        let _ = writeln!(out, "    <{tag}>");
        let _ = writeln!(out, "      <origin xyz=\"0 0 0\" rpy=\"0 0 0\"/>");
        let _ = writeln!(out, "      <geometry><box size=\"{}\"/></geometry>", fmt_vec(&spec.size));
        let _ = writeln!(out, "    </{tag}>");
    }
    let _ = writeln!(out, "  </link>");
}

fn fixed_joint(out: &mut String, name: &str, parent: &str, child: &str, origin: &Isometry3<f64>) {
    let _ = writeln!(out, "  <joint name=\"{name}\" type=\"fixed\">");
    let _ = writeln!(out, "    {}", fmt_origin(origin));
    let _ = writeln!(out, "    <parent link=\"{parent}\"/>");
    let _ = writeln!(out, "    <child link=\"{child}\"/>");
    let _ = writeln!(out, "  </joint>");
}

/// Serializes the model to URDF XML. `mesh_path_for` maps a link name to
/// the mesh reference written into the file.
pub fn urdf_xml(model: &KineticRobotModel, mesh_path_for: &dyn Fn(&str) -> String) -> String {
    let mut out = String::with_capacity(16 * 1024);
    let _ = writeln!(out, "<?xml version=\"1.0\"?>");
    let _ = writeln!(out, "<robot name=\"{}\">", model.name);

    for (idx, link) in model.links.iter().enumerate() {
        let frame = model.link_frame(idx);
        let (com, inertia) = props_in_frame(&link.props, &frame);
        let _ = writeln!(out, "  <link name=\"{}\">", link.name);
        inertial_block(&mut out, link.props.mass, &com, &inertia, "    ");
        for tag in ["visual", "collision"] {
            let _ = writeln!(out, "    <{tag}>");
            let _ = writeln!(out, "      <origin xyz=\"0 0 0\" rpy=\"0 0 0\"/>");
            let _ = writeln!(
                out,
                "      <geometry><mesh filename=\"{}\"/></geometry>",
                mesh_path_for(&link.name)
            );
            let _ = writeln!(out, "    </{tag}>");
        }
        let _ = writeln!(out, "  </link>");
    }

    for (j, joint) in model.joints.iter().enumerate() {
        let parent_frame = model.link_frame(joint.parent);
        let child_frame = model.joint_world_pose(j);
        let origin = parent_frame.inverse() * child_frame;
        let _ = writeln!(out, "  <joint name=\"{}\" type=\"revolute\">", joint.name);
        let _ = writeln!(out, "    {}", fmt_origin(&origin));
        let _ = writeln!(out, "    <parent link=\"{}\"/>", model.links[joint.parent].name);
        let _ = writeln!(out, "    <child link=\"{}\"/>", model.links[joint.child].name);
        let _ = writeln!(
            out,
            "    <axis xyz=\"{}\"/>",
            fmt_vec(&joint.spec.rotation_axis.unit())
        );
        let _ = writeln!(
            out,
            "    <limit lower=\"{}\" upper=\"{}\" effort=\"{}\" velocity=\"{}\"/>",
            joint.limits.lower, joint.limits.upper, joint.limits.effort, joint.limits.velocity
        );
        let _ = writeln!(out, "  </joint>");
    }

    // Electronics: servo box on each joint's parent link, core box in the
    // base.
    for (j, joint) in model.joints.iter().enumerate() {
        let name = format!("{}_motor", joint.name);
        box_link(&mut out, &name, &model.electronics.motor_box);
        let parent_frame = model.link_frame(joint.parent);
        let origin = parent_frame.inverse() * model.motor_pose(j);
        fixed_joint(
            &mut out,
            &format!("{name}_mount"),
            &model.links[joint.parent].name,
            &name,
            &origin,
        );
    }
    box_link(&mut out, "core_electronics", &model.electronics.core_box);
    let origin = model.base_pose().inverse() * model.core_pose();
    fixed_joint(
        &mut out,
        "core_electronics_mount",
        &model.links[BASE_LINK].name,
        "core_electronics",
        &origin,
    );

    let _ = writeln!(out, "</robot>");
    out
}

/// Writes every link mesh (in its link frame) as binary STL under `dir`.
pub fn write_link_meshes(model: &KineticRobotModel, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(model.links.len());
    for (idx, link) in model.links.iter().enumerate() {
        let inv = model.link_frame(idx).inverse();
        let mut local = link.mesh.clone();
        local.map_vertices(|p| inv.transform_point(&p));
        let path = dir.join(format!("{}.stl", link.name));
        save_stl_binary(&local, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Exports `<name>.urdf` plus `meshes/<link>.stl` under `out_dir`.
pub fn export_urdf(model: &KineticRobotModel, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    write_link_meshes(model, &out_dir.join("meshes"))?;
    let xml = urdf_xml(model, &|link| format!("meshes/{link}.stl"));
    let path = out_dir.join(format!("{}.urdf", model.name));
    std::fs::write(&path, xml)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::super::tests::test_partition;
    use super::super::{assemble, AssemblyConfig, ElectronicsSpec, KineticRobotModel};
    use super::*;
    use crate::model::{parse_urdf, validate_urdf};
    use crate::segmentation::LegTag;

    fn test_model() -> KineticRobotModel {
        assemble(&test_partition(), &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap()
    }

    #[test]
    fn exported_urdf_passes_schema_validation() {
        let model = test_model();
        let xml = urdf_xml(&model, &|l| format!("meshes/{l}.stl"));
        let violations = validate_urdf(&xml);
        assert!(violations.is_empty(), "{violations:#?}");
    }

    #[test]
    fn roundtrip_preserves_joint_world_origins() {
        let model = test_model();
        let xml = urdf_xml(&model, &|l| format!("meshes/{l}.stl"));
        let robot = parse_urdf(&xml).unwrap();
        // Walk the parsed tree: base frame is the model's base pose.
        for (j, joint) in model.joints.iter().enumerate() {
            let expect = model.joint_world_pose(j);
            let got = robot
                .joint_world_pose(&joint.name, &model.base_pose())
                .expect("joint present");
            let dp = (got.translation.vector - expect.translation.vector).norm();
            assert!(dp < 1e-6, "{}: origin off by {dp}", joint.name);
            let da = got.rotation.angle_to(&expect.rotation);
            assert!(da < 1e-6, "{}: rotation off by {da}", joint.name);
        }
    }

    #[test]
    fn roundtrip_preserves_masses_and_axes() {
        let model = test_model();
        let xml = urdf_xml(&model, &|l| format!("meshes/{l}.stl"));
        let robot = parse_urdf(&xml).unwrap();
        assert_eq!(robot.revolute_joint_count(), 8);
        for link in &model.links {
            let parsed = robot.links.iter().find(|l| l.name == link.name).unwrap();
            assert!((parsed.mass.unwrap() - link.props.mass).abs() < 1e-12);
        }
        for joint in &model.joints {
            let parsed = robot.joints.iter().find(|p| p.name == joint.name).unwrap();
            let expect = joint.spec.rotation_axis.unit();
            let axis = parsed.axis.expect("revolute joint has an axis");
            assert!((axis - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn shoulder_origin_matches_partition_in_base_frame() {
        let partition = test_partition();
        let model =
            assemble(&partition, &ElectronicsSpec::default(), &AssemblyConfig::default()).unwrap();
        let xml = urdf_xml(&model, &|l| format!("meshes/{l}.stl"));
        let robot = parse_urdf(&xml).unwrap();
        let parsed = robot
            .joints
            .iter()
            .find(|p| p.name == "front_left_shoulder")
            .unwrap();
        let expect = model.base_pose().inverse()
            * partition.leg(LegTag::FrontLeft).shoulder.origin;
        assert!((parsed.origin.translation.vector - expect.coords).norm() < 1e-9);
    }
}
