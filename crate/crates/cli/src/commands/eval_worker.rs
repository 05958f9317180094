//! `eval-worker`: a complete external evaluator built on the in-process
//! gait search. Reads exchange requests line by line on stdin, loads each
//! robot back from its URDF, scores it, and answers on stdout.
//!
//! Doubles as the loopback fixture for the exchange protocol and as a
//! reference for wiring a real trainer.

use std::io::{BufRead, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Args;
use quadforge::error::{Error, Result};
use quadforge::eval::{BuiltinEvaluator, EvalRequest, EvalResponse, Preference, PROTOCOL_SCHEMA};
use quadforge::mesh::{load_mesh, mass_properties, MeshFormat};
use quadforge::model::{
    ElectronicsSpec, JointLimits, JointModel, KineticRobotModel, LinkModel, parse_urdf,
};
use quadforge::segmentation::{Axis, JointKind, JointSpec, LegTag};

#[derive(Args)]
pub struct EvalWorkerArgs {
    /// Rollouts per evaluation.
    #[arg(long)]
    pub budget: Option<usize>,
}

pub fn run(config: Option<&Path>, args: EvalWorkerArgs) -> Result<ExitCode> {
    let cfg = super::load_config(config)?;
    let mut evaluator = BuiltinEvaluator {
        sim: cfg.sim.clone(),
        weights: cfg.reward,
        command: cfg.command,
        search: cfg.gait_search.clone(),
    };
    if let Some(budget) = args.budget {
        evaluator.search.budget = budget;
    }

    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<EvalRequest>(&line) {
            Ok(request) => answer(&evaluator, &request),
            Err(e) => EvalResponse {
                schema: PROTOCOL_SCHEMA,
                id: String::new(),
                fitness: 0.0,
                mean_episode_reward: 0.0,
                velocity_term_sum: 0.0,
                energy_term_sum: 0.0,
                gait_params: None,
                error: Some(format!("bad request: {e}")),
            },
        };
        writeln!(stdout, "{}", serde_json::to_string(&response)?)?;
        stdout.flush()?;
    }
    super::ok()
}

fn answer(evaluator: &BuiltinEvaluator, request: &EvalRequest) -> EvalResponse {
    let mut evaluator = evaluator.clone();
    evaluator.command = request.command;
    let outcome = Preference::parse(&request.preference)
        .and_then(|pref| {
            let model = load_model_from_urdf(Path::new(&request.urdf))?;
            Ok(evaluator.evaluate(&model, pref, request.seed))
        });
    match outcome {
        Ok(result) => EvalResponse {
            schema: PROTOCOL_SCHEMA,
            id: request.id.clone(),
            fitness: result.fitness,
            mean_episode_reward: result.mean_episode_reward,
            velocity_term_sum: result.velocity_term_sum,
            energy_term_sum: result.energy_term_sum,
            gait_params: result
                .gait_params
                .and_then(|g| serde_json::to_value(g).ok()),
            error: None,
        },
        Err(e) => EvalResponse {
            schema: PROTOCOL_SCHEMA,
            id: request.id.clone(),
            fitness: 0.0,
            mean_episode_reward: 0.0,
            velocity_term_sum: 0.0,
            energy_term_sum: 0.0,
            gait_params: None,
            error: Some(e.to_string()),
        },
    }
}

/// Rebuilds a kinetic model from an exported URDF: loads link meshes,
/// resolves world frames by forward kinematics at zero pose, and lumps
/// fixed-joint electronics boxes back into their parent links.
pub fn load_model_from_urdf(path: &Path) -> Result<KineticRobotModel> {
    let xml = std::fs::read_to_string(path)
        .map_err(|e| Error::Evaluation(format!("cannot read {}: {e}", path.display())))?;
    let robot = parse_urdf(&xml)?;
    let dir = path.parent().unwrap_or(Path::new("."));

    let mut links = Vec::with_capacity(9);
    let mut joints = Vec::with_capacity(8);
    // The articulated core uses the exporter's naming scheme.
    let base_world = KineticRobotModel {
        name: String::new(),
        links: vec![],
        joints: vec![],
        electronics: ElectronicsSpec::default(),
        density: 0.0,
    }
    .base_pose();

    let link_names: Vec<String> = std::iter::once("base".to_string())
        .chain(LegTag::ALL.iter().flat_map(|t| {
            [format!("{}_upper", t.name()), format!("{}_lower", t.name())]
        }))
        .collect();
    for name in &link_names {
        let parsed = robot
            .links
            .iter()
            .find(|l| &l.name == name)
            .ok_or_else(|| Error::UrdfParse(format!("link {name} missing")))?;
        let mesh_rel = parsed
            .mesh_file
            .as_ref()
            .ok_or_else(|| Error::UrdfParse(format!("link {name} has no mesh geometry")))?;
        let frame = if name == "base" {
            base_world
        } else {
            let joint = robot
                .joints
                .iter()
                .find(|j| &j.child == name)
                .ok_or_else(|| Error::UrdfParse(format!("link {name} is unattached")))?;
            robot
                .joint_world_pose(&joint.name, &base_world)
                .ok_or_else(|| Error::UrdfParse(format!("no pose chain for {name}")))?
        };
        let mut mesh = load_mesh(&dir.join(mesh_rel), MeshFormat::Stl, 1.0)?;
        mesh.map_vertices(|p| frame.transform_point(&p));
        // Uniform density recovered from the declared mass.
        let volume = mesh.signed_volume();
        let density = parsed.mass.unwrap_or(0.0) / volume.max(1e-12);
        let props = mass_properties(&mesh, density.max(1e-9))?;
        links.push(LinkModel { name: name.clone(), mesh, props });
    }

    for tag in LegTag::ALL {
        for (kind, joint_name, parent, child) in [
            (
                JointKind::Shoulder,
                format!("{}_shoulder", tag.name()),
                "base".to_string(),
                format!("{}_upper", tag.name()),
            ),
            (
                JointKind::Knee,
                format!("{}_knee", tag.name()),
                format!("{}_upper", tag.name()),
                format!("{}_lower", tag.name()),
            ),
        ] {
            let parsed = robot
                .joints
                .iter()
                .find(|j| j.name == joint_name)
                .ok_or_else(|| Error::UrdfParse(format!("joint {joint_name} missing")))?;
            let pose = robot
                .joint_world_pose(&joint_name, &base_world)
                .ok_or_else(|| Error::UrdfParse(format!("no pose chain for {joint_name}")))?;
            let axis_vec = parsed
                .axis
                .ok_or_else(|| Error::UrdfParse(format!("{joint_name} lacks an axis")))?;
            let rotation_axis = Axis::ALL
                .into_iter()
                .find(|a| (a.unit() - axis_vec).norm() < 1e-9)
                .ok_or_else(|| {
                    Error::UrdfParse(format!("{joint_name}: axis {axis_vec:?} is not a basis axis"))
                })?;
            let (lower, upper, effort, velocity) =
                parsed.limits.unwrap_or((-1.57, 1.57, 4.4, 6.0));
            let spec = JointSpec {
                origin: nalgebra::Point3::from(pose.translation.vector),
                frame: pose.rotation.to_rotation_matrix(),
                kind,
                rotation_axis,
            };
            spec.validate()?;
            let parent_idx = link_names.iter().position(|n| *n == parent).unwrap();
            let child_idx = link_names.iter().position(|n| *n == child).unwrap();
            joints.push(JointModel {
                name: joint_name,
                parent: parent_idx,
                child: child_idx,
                spec,
                limits: JointLimits { lower, upper, velocity, effort },
            });
        }
    }

    // Fixed-joint boxes (servo + core electronics) lump into their parent
    // links; zeroed electronics keep the sim from double counting.
    for joint in robot.joints.iter().filter(|j| j.joint_type == "fixed") {
        let Some(box_link) = robot.links.iter().find(|l| l.name == joint.child) else {
            continue;
        };
        let Some(parent_idx) = link_names.iter().position(|n| *n == joint.parent) else {
            continue;
        };
        let pose = robot
            .joint_world_pose(&joint.name, &base_world)
            .ok_or_else(|| Error::UrdfParse(format!("no pose chain for {}", joint.name)))?;
        let mass = box_link.mass.unwrap_or(0.0);
        if mass <= 0.0 {
            continue;
        }
        let inertia_local = box_link.inertia.unwrap_or_default();
        let r = pose.rotation.to_rotation_matrix();
        let com = pose.transform_point(&box_link.inertial_origin());
        let inertia_world = r.matrix() * inertia_local * r.matrix().transpose();
        let host = &mut links[parent_idx].props;
        let combined_mass = host.mass + mass;
        let combined_com = nalgebra::Point3::from(
            (host.center_of_mass.coords * host.mass + com.coords * mass) / combined_mass,
        );
        let shift = |m: f64, c: nalgebra::Point3<f64>, i: nalgebra::Matrix3<f64>| {
            let d = c - combined_com;
            i + (nalgebra::Matrix3::identity() * d.norm_squared() - d * d.transpose()) * m
        };
        host.inertia_tensor = shift(host.mass, host.center_of_mass, host.inertia_tensor)
            + shift(mass, com, inertia_world);
        host.center_of_mass = combined_com;
        host.mass = combined_mass;
    }

    let mut electronics = ElectronicsSpec::default();
    electronics.motor_box.mass = 0.0;
    electronics.core_box.mass = 0.0;

    let model = KineticRobotModel {
        name: robot.name,
        links,
        joints,
        electronics,
        density: 0.0,
    };
    model.validate()?;
    Ok(model)
}
