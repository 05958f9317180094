//! URDF parsing and schema validation, used for re-import checks and the
//! export conformance gate.
//!
//! The validator enforces the URDF 1.0 grammar (element structure,
//! required attributes, value formats) plus the semantic rules a file must
//! satisfy to describe a robot: unique names, resolvable parent/child
//! links, a single root, and an acyclic tree.

use std::collections::{HashMap, HashSet};

use nalgebra::{Isometry3, Matrix3, Point3, Translation3, UnitQuaternion, Vector3};
use roxmltree::{Document, Node};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct UrdfLink {
    pub name: String,
    pub mass: Option<f64>,
    /// Full inertia matrix about the inertial origin.
    pub inertia: Option<Matrix3<f64>>,
    /// Inertial origin offset in the link frame.
    pub inertial_xyz: Vector3<f64>,
    /// First mesh filename of the visual/collision geometry, if any.
    pub mesh_file: Option<String>,
}

impl UrdfLink {
    pub fn inertial_origin(&self) -> Point3<f64> {
        Point3::from(self.inertial_xyz)
    }
}

#[derive(Debug, Clone)]
pub struct UrdfJoint {
    pub name: String,
    pub joint_type: String,
    pub parent: String,
    pub child: String,
    /// Pose of the child frame in the parent frame.
    pub origin: Isometry3<f64>,
    pub axis: Option<Vector3<f64>>,
    pub limits: Option<(f64, f64, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct UrdfRobot {
    pub name: String,
    pub links: Vec<UrdfLink>,
    pub joints: Vec<UrdfJoint>,
}

impl UrdfRobot {
    pub fn revolute_joint_count(&self) -> usize {
        self.joints.iter().filter(|j| j.joint_type == "revolute").count()
    }

    /// Root link: the one that is nobody's child.
    pub fn root_link(&self) -> Option<&str> {
        let children: HashSet<&str> = self.joints.iter().map(|j| j.child.as_str()).collect();
        self.links
            .iter()
            .map(|l| l.name.as_str())
            .find(|n| !children.contains(n))
    }

    /// World pose of a joint frame given the root link's world pose.
    pub fn joint_world_pose(
        &self,
        joint_name: &str,
        root_pose: &Isometry3<f64>,
    ) -> Option<Isometry3<f64>> {
        let joint = self.joints.iter().find(|j| j.name == joint_name)?;
        let mut pose = joint.origin;
        let mut link = joint.parent.as_str();
        let root = self.root_link()?;
        while link != root {
            let up = self.joints.iter().find(|j| j.child == link)?;
            pose = up.origin * pose;
            link = up.parent.as_str();
        }
        Some(root_pose * pose)
    }
}

fn parse_vec3(s: &str) -> Option<Vector3<f64>> {
    let parts: Vec<f64> = s.split_whitespace().map(|t| t.parse().ok()).collect::<Option<_>>()?;
    (parts.len() == 3).then(|| Vector3::new(parts[0], parts[1], parts[2]))
}

fn parse_origin(node: Node) -> Isometry3<f64> {
    let mut iso = Isometry3::identity();
    if let Some(origin) = node.children().find(|c| c.has_tag_name("origin")) {
        if let Some(xyz) = origin.attribute("xyz").and_then(parse_vec3) {
            iso.translation = Translation3::from(xyz);
        }
        if let Some(rpy) = origin.attribute("rpy").and_then(parse_vec3) {
            iso.rotation = UnitQuaternion::from_euler_angles(rpy.x, rpy.y, rpy.z);
        }
    }
    iso
}

/// Parses a URDF document into its kinematic skeleton.
pub fn parse_urdf(xml: &str) -> Result<UrdfRobot> {
    let doc = Document::parse(xml).map_err(|e| Error::UrdfParse(e.to_string()))?;
    let robot = doc.root_element();
    if !robot.has_tag_name("robot") {
        return Err(Error::UrdfParse("root element is not <robot>".into()));
    }
    let name = robot.attribute("name").unwrap_or_default().to_string();
    let mut links = Vec::new();
    let mut joints = Vec::new();
    for child in robot.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "link" => {
                let name = child
                    .attribute("name")
                    .ok_or_else(|| Error::UrdfParse("link without name".into()))?
                    .to_string();
                let inertial = child.children().find(|c| c.has_tag_name("inertial"));
                let mass = inertial
                    .and_then(|i| i.children().find(|c| c.has_tag_name("mass")))
                    .and_then(|m| m.attribute("value"))
                    .and_then(|v| v.parse().ok());
                let inertia = inertial
                    .and_then(|i| i.children().find(|c| c.has_tag_name("inertia")))
                    .and_then(|i| {
                        let get = |k: &str| i.attribute(k).and_then(|v| v.parse::<f64>().ok());
                        let (ixx, iyy, izz) = (get("ixx")?, get("iyy")?, get("izz")?);
                        let (ixy, ixz, iyz) = (get("ixy")?, get("ixz")?, get("iyz")?);
                        Some(Matrix3::new(ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz))
                    });
                let inertial_xyz = inertial
                    .and_then(|i| i.children().find(|c| c.has_tag_name("origin")))
                    .and_then(|o| o.attribute("xyz"))
                    .and_then(parse_vec3)
                    .unwrap_or_else(Vector3::zeros);
                let mesh_file = child
                    .children()
                    .filter(|c| c.has_tag_name("visual") || c.has_tag_name("collision"))
                    .filter_map(|v| v.children().find(|c| c.has_tag_name("geometry")))
                    .filter_map(|g| g.children().find(|c| c.has_tag_name("mesh")))
                    .filter_map(|m| m.attribute("filename"))
                    .next()
                    .map(str::to_string);
                links.push(UrdfLink { name, mass, inertia, inertial_xyz, mesh_file });
            }
            "joint" => {
                let name = child
                    .attribute("name")
                    .ok_or_else(|| Error::UrdfParse("joint without name".into()))?
                    .to_string();
                let joint_type = child.attribute("type").unwrap_or_default().to_string();
                let get_link = |tag: &str| {
                    child
                        .children()
                        .find(|c| c.has_tag_name(tag))
                        .and_then(|n| n.attribute("link"))
                        .map(str::to_string)
                        .ok_or_else(|| Error::UrdfParse(format!("joint {name} lacks <{tag}>")))
                };
                let parent = get_link("parent")?;
                let child_link = get_link("child")?;
                let origin = parse_origin(child);
                let axis = child
                    .children()
                    .find(|c| c.has_tag_name("axis"))
                    .and_then(|n| n.attribute("xyz"))
                    .and_then(parse_vec3);
                let limits = child.children().find(|c| c.has_tag_name("limit")).map(|l| {
                    let get = |k: &str| {
                        l.attribute(k).and_then(|v| v.parse::<f64>().ok()).unwrap_or(0.0)
                    };
                    (get("lower"), get("upper"), get("effort"), get("velocity"))
                });
                joints.push(UrdfJoint {
                    name,
                    joint_type,
                    parent,
                    child: child_link,
                    origin,
                    axis,
                    limits,
                });
            }
            _ => {}
        }
    }
    Ok(UrdfRobot { name, links, joints })
}

const JOINT_TYPES: [&str; 6] = ["revolute", "continuous", "prismatic", "fixed", "floating", "planar"];

/// Validates a URDF document against the URDF 1.0 schema rules. Returns
/// every violation found; an empty list means the file conforms.
pub fn validate_urdf(xml: &str) -> Vec<String> {
    let mut errs = Vec::new();
    let doc = match Document::parse(xml) {
        Ok(d) => d,
        Err(e) => return vec![format!("not well-formed XML: {e}")],
    };
    let robot = doc.root_element();
    if !robot.has_tag_name("robot") {
        return vec![format!("root element is <{}>, not <robot>", robot.tag_name().name())];
    }
    if robot.attribute("name").is_none() {
        errs.push("<robot> lacks the required name attribute".into());
    }

    let mut link_names: Vec<String> = Vec::new();
    let mut joint_names: HashSet<String> = HashSet::new();
    let mut edges: Vec<(String, String, String)> = Vec::new(); // (joint, parent, child)

    for child in robot.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "link" => validate_link(child, &mut link_names, &mut errs),
            "joint" => validate_joint(child, &mut joint_names, &mut edges, &mut errs),
            "material" | "transmission" | "gazebo" => {}
            other => errs.push(format!("unexpected element <{other}> under <robot>")),
        }
    }

    // Semantic checks: resolvable references, unique children, one root,
    // no cycles.
    let link_set: HashSet<&str> = link_names.iter().map(String::as_str).collect();
    if link_set.len() != link_names.len() {
        errs.push("duplicate link names".into());
    }
    let mut child_seen: HashSet<&str> = HashSet::new();
    for (joint, parent, child) in &edges {
        if !link_set.contains(parent.as_str()) {
            errs.push(format!("joint {joint}: parent link {parent} does not exist"));
        }
        if !link_set.contains(child.as_str()) {
            errs.push(format!("joint {joint}: child link {child} does not exist"));
        }
        if !child_seen.insert(child.as_str()) {
            errs.push(format!("link {child} is the child of more than one joint"));
        }
    }
    let roots: Vec<&str> = link_names
        .iter()
        .map(String::as_str)
        .filter(|n| !child_seen.contains(*n))
        .collect();
    if roots.len() != 1 && !link_names.is_empty() {
        errs.push(format!("expected exactly one root link, found {:?}", roots));
    }
    // Cycle check: walk up from every link; the parent map is a function
    // because children are unique.
    let parent_of: HashMap<&str, &str> = edges
        .iter()
        .map(|(_, p, c)| (c.as_str(), p.as_str()))
        .collect();
    for start in &link_names {
        let mut seen = HashSet::new();
        let mut cur = start.as_str();
        while let Some(&up) = parent_of.get(cur) {
            if !seen.insert(up) {
                errs.push(format!("kinematic loop through link {start}"));
                break;
            }
            cur = up;
        }
    }
    errs
}

fn check_vec3_attr(node: Node, attr: &str, required: bool, ctx: &str, errs: &mut Vec<String>) {
    match node.attribute(attr) {
        Some(v) if parse_vec3(v).is_none() => {
            errs.push(format!("{ctx}: attribute {attr}=\"{v}\" is not three floats"))
        }
        None if required => errs.push(format!("{ctx}: missing required attribute {attr}")),
        _ => {}
    }
}

fn check_float_attr(node: Node, attr: &str, required: bool, ctx: &str, errs: &mut Vec<String>) {
    match node.attribute(attr) {
        Some(v) if v.parse::<f64>().is_err() => {
            errs.push(format!("{ctx}: attribute {attr}=\"{v}\" is not a float"))
        }
        None if required => errs.push(format!("{ctx}: missing required attribute {attr}")),
        _ => {}
    }
}

fn validate_geometry(node: Node, ctx: &str, errs: &mut Vec<String>) {
    let shapes: Vec<Node> = node.children().filter(|c| c.is_element()).collect();
    if shapes.len() != 1 {
        errs.push(format!("{ctx}: <geometry> must contain exactly one shape"));
        return;
    }
    let shape = shapes[0];
    match shape.tag_name().name() {
        "box" => check_vec3_attr(shape, "size", true, ctx, errs),
        "cylinder" => {
            check_float_attr(shape, "radius", true, ctx, errs);
            check_float_attr(shape, "length", true, ctx, errs);
        }
        "sphere" => check_float_attr(shape, "radius", true, ctx, errs),
        "mesh" => {
            if shape.attribute("filename").is_none() {
                errs.push(format!("{ctx}: <mesh> lacks filename"));
            }
            check_vec3_attr(shape, "scale", false, ctx, errs);
        }
        other => errs.push(format!("{ctx}: unknown geometry <{other}>")),
    }
}

fn validate_origin(node: Node, ctx: &str, errs: &mut Vec<String>) {
    if let Some(origin) = node.children().find(|c| c.has_tag_name("origin")) {
        check_vec3_attr(origin, "xyz", false, ctx, errs);
        check_vec3_attr(origin, "rpy", false, ctx, errs);
    }
}

fn validate_link(node: Node, names: &mut Vec<String>, errs: &mut Vec<String>) {
    let name = match node.attribute("name") {
        Some(n) => n.to_string(),
        None => {
            errs.push("<link> lacks the required name attribute".into());
            return;
        }
    };
    let ctx = format!("link {name}");
    for child in node.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "inertial" => {
                validate_origin(child, &ctx, errs);
                match child.children().find(|c| c.has_tag_name("mass")) {
                    Some(mass) => check_float_attr(mass, "value", true, &ctx, errs),
                    None => errs.push(format!("{ctx}: <inertial> lacks <mass>")),
                }
                match child.children().find(|c| c.has_tag_name("inertia")) {
                    Some(inertia) => {
                        for attr in ["ixx", "ixy", "ixz", "iyy", "iyz", "izz"] {
                            check_float_attr(inertia, attr, true, &ctx, errs);
                        }
                    }
                    None => errs.push(format!("{ctx}: <inertial> lacks <inertia>")),
                }
            }
            "visual" | "collision" => {
                validate_origin(child, &ctx, errs);
                match child.children().find(|c| c.has_tag_name("geometry")) {
                    Some(g) => validate_geometry(g, &ctx, errs),
                    None => errs.push(format!("{ctx}: <{}> lacks <geometry>", child.tag_name().name())),
                }
            }
            other => errs.push(format!("{ctx}: unexpected element <{other}>")),
        }
    }
    names.push(name);
}

fn validate_joint(
    node: Node,
    names: &mut HashSet<String>,
    edges: &mut Vec<(String, String, String)>,
    errs: &mut Vec<String>,
) {
    let name = match node.attribute("name") {
        Some(n) => n.to_string(),
        None => {
            errs.push("<joint> lacks the required name attribute".into());
            return;
        }
    };
    let ctx = format!("joint {name}");
    if !names.insert(name.clone()) {
        errs.push(format!("duplicate joint name {name}"));
    }
    let jtype = node.attribute("type").unwrap_or("");
    if !JOINT_TYPES.contains(&jtype) {
        errs.push(format!("{ctx}: invalid type \"{jtype}\""));
    }
    validate_origin(node, &ctx, errs);
    let mut parent = None;
    let mut child_link = None;
    for child in node.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "origin" => {}
            "parent" => parent = child.attribute("link").map(str::to_string),
            "child" => child_link = child.attribute("link").map(str::to_string),
            "axis" => check_vec3_attr(child, "xyz", true, &ctx, errs),
            "limit" => {
                check_float_attr(child, "effort", true, &ctx, errs);
                check_float_attr(child, "velocity", true, &ctx, errs);
                check_float_attr(child, "lower", false, &ctx, errs);
                check_float_attr(child, "upper", false, &ctx, errs);
            }
            "calibration" | "dynamics" | "mimic" | "safety_controller" => {}
            other => errs.push(format!("{ctx}: unexpected element <{other}>")),
        }
    }
    match (&parent, &child_link) {
        (Some(p), Some(c)) => edges.push((name, p.clone(), c.clone())),
        _ => errs.push(format!("{ctx}: missing <parent> or <child>")),
    }
    if matches!(jtype, "revolute" | "prismatic")
        && !node.children().any(|c| c.has_tag_name("limit"))
    {
        errs.push(format!("{ctx}: {jtype} joints require <limit>"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<?xml version="1.0"?>
<robot name="r">
  <link name="a"/>
  <link name="b"/>
  <joint name="j" type="revolute">
    <origin xyz="0 0 1" rpy="0 0 0"/>
    <parent link="a"/>
    <child link="b"/>
    <axis xyz="1 0 0"/>
    <limit lower="-1" upper="1" effort="2" velocity="3"/>
  </joint>
</robot>"#;

    #[test]
    fn minimal_robot_validates_and_parses() {
        assert!(validate_urdf(MINIMAL).is_empty());
        let robot = parse_urdf(MINIMAL).unwrap();
        assert_eq!(robot.root_link(), Some("a"));
        assert_eq!(robot.revolute_joint_count(), 1);
        let pose = robot
            .joint_world_pose("j", &Isometry3::identity())
            .unwrap();
        assert!((pose.translation.z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_limit_is_flagged() {
        let bad = MINIMAL.replace(
            "<limit lower=\"-1\" upper=\"1\" effort=\"2\" velocity=\"3\"/>",
            "",
        );
        let errs = validate_urdf(&bad);
        assert!(errs.iter().any(|e| e.contains("require <limit>")), "{errs:?}");
    }

    #[test]
    fn dangling_parent_is_flagged() {
        let bad = MINIMAL.replace("<parent link=\"a\"/>", "<parent link=\"ghost\"/>");
        let errs = validate_urdf(&bad);
        assert!(errs.iter().any(|e| e.contains("does not exist")), "{errs:?}");
    }

    #[test]
    fn cycle_is_flagged() {
        let cyclic = r#"<robot name="r">
  <link name="a"/><link name="b"/>
  <joint name="j1" type="fixed"><parent link="a"/><child link="b"/></joint>
  <joint name="j2" type="fixed"><parent link="b"/><child link="a"/></joint>
</robot>"#;
        let errs = validate_urdf(cyclic);
        assert!(
            errs.iter().any(|e| e.contains("loop") || e.contains("root")),
            "{errs:?}"
        );
    }

    #[test]
    fn bad_vector_attribute_is_flagged() {
        let bad = MINIMAL.replace("xyz=\"1 0 0\"", "xyz=\"1 0\"");
        let errs = validate_urdf(&bad);
        assert!(errs.iter().any(|e| e.contains("not three floats")), "{errs:?}");
    }
}
