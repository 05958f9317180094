//! Immutable catalog of body and limb geometries harvested from processed
//! designs, plus genome realization: build a concrete robot by attaching
//! chosen limb prototypes to a chosen body's joint sockets.
//!
//! Limb prototypes are stored in the front-left leg's joint-local frame;
//! right-side legs realize the mirrored prototype. Rear legs reuse the
//! front prototype unmirrored (their sockets are spun 180° about z), which
//! keeps the robot bilaterally symmetric.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::genome::RobotGenome;
use crate::error::{Error, Result};
use crate::mesh::{load_mesh, save_stl_binary, MeshFormat, TriangleMesh};
use crate::model::{
    assemble, elongate_legs, AssemblyConfig, ElectronicsSpec, KineticRobotModel,
};
use crate::segmentation::{BodyPartition, JointKind, JointSpec, LegSegment, LegTag};

/// Body level of a limb geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimbLevel {
    Upper,
    Lower,
}

/// A base-link geometry with its four shoulder sockets (canonical frame).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyGeometry {
    pub id: String,
    pub mesh: TriangleMesh,
    /// Shoulder joints in leg-tag order.
    pub shoulders: Vec<JointSpec>,
    /// Ground reference of the source design.
    pub ground_z: f64,
}

/// A limb geometry in its own joint frame (front-left convention).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimbGeometry {
    pub id: String,
    pub mesh: TriangleMesh,
    /// For uppers: the knee origin in the shoulder-local frame.
    pub knee_local: Option<Point3<f64>>,
}

/// The design repository. Geometries are immutable once registered.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DesignRepository {
    bodies: BTreeMap<String, BodyGeometry>,
    uppers: BTreeMap<String, LimbGeometry>,
    lowers: BTreeMap<String, LimbGeometry>,
}

fn iso_of(spec: &JointSpec) -> Isometry3<f64> {
    Isometry3::from_parts(
        Translation3::from(spec.origin.coords),
        UnitQuaternion::from_rotation_matrix(&spec.frame),
    )
}

impl DesignRepository {
    pub fn body_id(source: &str) -> String {
        format!("{source}/body")
    }

    pub fn limb_id(source: &str, level: LimbLevel) -> String {
        match level {
            LimbLevel::Upper => format!("{source}/upper"),
            LimbLevel::Lower => format!("{source}/lower"),
        }
    }

    pub fn body_ids(&self) -> Vec<String> {
        self.bodies.keys().cloned().collect()
    }

    pub fn limb_ids(&self, level: LimbLevel) -> Vec<String> {
        match level {
            LimbLevel::Upper => self.uppers.keys().cloned().collect(),
            LimbLevel::Lower => self.lowers.keys().cloned().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    /// Harvests the body and the front-left limb prototypes of a
    /// partitioned design.
    pub fn ingest_partition(&mut self, source_id: &str, partition: &BodyPartition) -> Result<()> {
        let body_id = Self::body_id(source_id);
        if self.bodies.contains_key(&body_id) {
            return Err(Error::Config(format!("source {source_id} already ingested")));
        }
        let fl = partition.leg(LegTag::FrontLeft);
        let t_sh = iso_of(&fl.shoulder);
        let inv_sh = t_sh.inverse();
        let mut upper_mesh = fl.upper.clone();
        upper_mesh.map_vertices(|p| inv_sh.transform_point(&p));
        let knee_local = inv_sh.transform_point(&fl.knee.origin);

        let t_kn = iso_of(&fl.knee);
        let inv_kn = t_kn.inverse();
        let mut lower_mesh = fl.lower.clone();
        lower_mesh.map_vertices(|p| inv_kn.transform_point(&p));

        self.bodies.insert(
            body_id.clone(),
            BodyGeometry {
                id: body_id,
                mesh: partition.base_link.clone(),
                shoulders: partition.legs.iter().map(|l| l.shoulder).collect(),
                ground_z: partition.ground_z,
            },
        );
        let upper_id = Self::limb_id(source_id, LimbLevel::Upper);
        self.uppers.insert(
            upper_id.clone(),
            LimbGeometry { id: upper_id, mesh: upper_mesh, knee_local: Some(knee_local) },
        );
        let lower_id = Self::limb_id(source_id, LimbLevel::Lower);
        self.lowers.insert(
            lower_id.clone(),
            LimbGeometry { id: lower_id, mesh: lower_mesh, knee_local: None },
        );
        Ok(())
    }

    /// Builds the concrete robot a genome describes.
    pub fn realize(
        &self,
        genome: &RobotGenome,
        electronics: &ElectronicsSpec,
        assembly: &AssemblyConfig,
    ) -> Result<KineticRobotModel> {
        genome.validate()?;
        let body = self
            .bodies
            .get(&genome.body_choice)
            .ok_or_else(|| Error::Config(format!("unknown body {}", genome.body_choice)))?;
        let upper = self
            .uppers
            .get(&genome.upper_choice)
            .ok_or_else(|| Error::Config(format!("unknown upper limb {}", genome.upper_choice)))?;
        let lower = self
            .lowers
            .get(&genome.lower_choice)
            .ok_or_else(|| Error::Config(format!("unknown lower limb {}", genome.lower_choice)))?;
        let knee_local = upper.knee_local.ok_or_else(|| {
            Error::Config(format!("upper limb {} lacks a knee socket", upper.id))
        })?;

        let mut legs = Vec::with_capacity(4);
        for (slot, tag) in LegTag::ALL.into_iter().enumerate() {
            let mut shoulder = body.shoulders[slot];
            shoulder.rotation_axis = genome.shoulder_axis;
            let t_sh = iso_of(&shoulder);

            // Shoulder sockets share one orientation per side pair, and
            // the rear pair is the front pair spun 180° about z. Realizing
            // the front-left prototype as a proper bilateral/fore-aft
            // mirror therefore needs the local-x flip exactly when
            // rightness and frontness agree (FR and RL).
            let mirror_upper = tag.is_right() == tag.is_front();
            let mut upper_mesh = upper.mesh.clone();
            if mirror_upper {
                upper_mesh = upper_mesh.mirrored(
                    Point3::origin(),
                    nalgebra::Unit::new_normalize(nalgebra::Vector3::x()),
                );
            }
            upper_mesh.map_vertices(|p| t_sh.transform_point(&p));

            let knee_src = if mirror_upper {
                Point3::new(-knee_local.x, knee_local.y, knee_local.z)
            } else {
                knee_local
            };
            let knee_origin = t_sh.transform_point(&knee_src);
            let mut knee = JointSpec {
                origin: knee_origin,
                frame: canonical_knee_frame(),
                kind: JointKind::Knee,
                rotation_axis: genome.knee_axis,
            };
            knee.validate()?;
            let t_kn = iso_of(&knee);

            // Knee frames all share one orientation (x facing, z up), so
            // the flips decompose cleanly: local y is lateral (flip for
            // right legs), local x is fore-aft (flip for rear legs).
            let mut lower_mesh = lower.mesh.clone();
            if tag.is_right() {
                lower_mesh = lower_mesh.mirrored(
                    Point3::origin(),
                    nalgebra::Unit::new_normalize(nalgebra::Vector3::y()),
                );
            }
            if !tag.is_front() {
                lower_mesh = lower_mesh.mirrored(
                    Point3::origin(),
                    nalgebra::Unit::new_normalize(nalgebra::Vector3::x()),
                );
            }
            lower_mesh.map_vertices(|p| t_kn.transform_point(&p));

            legs.push(LegSegment { tag, upper: upper_mesh, lower: lower_mesh, shoulder, knee });
        }

        let partition = BodyPartition {
            base_link: body.mesh.clone(),
            legs,
            separation_planes: separation_planes_of(&body.shoulders),
            ground_z: body.ground_z,
        };
        let mut model = assemble(&partition, electronics, assembly)?;
        if genome.leg_scale_index > 0 {
            model = elongate_legs(&model, genome.leg_scale_index)?;
        }
        Ok(model)
    }

    /// Writes the repository as a directory: one STL per geometry plus a
    /// JSON manifest with joint sockets.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        #[derive(Serialize)]
        struct Manifest<'a> {
            bodies: Vec<BodyEntry<'a>>,
            uppers: Vec<LimbEntry<'a>>,
            lowers: Vec<LimbEntry<'a>>,
        }
        #[derive(Serialize)]
        struct BodyEntry<'a> {
            id: &'a str,
            mesh: String,
            shoulders: &'a Vec<JointSpec>,
            ground_z: f64,
        }
        #[derive(Serialize)]
        struct LimbEntry<'a> {
            id: &'a str,
            mesh: String,
            knee_local: Option<Point3<f64>>,
        }
        let sanitize = |id: &str| id.replace('/', "_");
        let mut manifest =
            Manifest { bodies: Vec::new(), uppers: Vec::new(), lowers: Vec::new() };
        for body in self.bodies.values() {
            let file = format!("{}.stl", sanitize(&body.id));
            save_stl_binary(&body.mesh, &dir.join(&file))?;
            manifest.bodies.push(BodyEntry {
                id: &body.id,
                mesh: file,
                shoulders: &body.shoulders,
                ground_z: body.ground_z,
            });
        }
        for (list, map) in [(&mut manifest.uppers, &self.uppers), (&mut manifest.lowers, &self.lowers)]
        {
            for limb in map.values() {
                let file = format!("{}.stl", sanitize(&limb.id));
                save_stl_binary(&limb.mesh, &dir.join(&file))?;
                list.push(LimbEntry { id: &limb.id, mesh: file, knee_local: limb.knee_local });
            }
        }
        std::fs::write(dir.join("repository.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    /// Loads and merges a repository directory written by [`save_dir`].
    pub fn load_dir(&mut self, dir: &Path) -> Result<()> {
        #[derive(Deserialize)]
        struct Manifest {
            bodies: Vec<BodyEntry>,
            uppers: Vec<LimbEntry>,
            lowers: Vec<LimbEntry>,
        }
        #[derive(Deserialize)]
        struct BodyEntry {
            id: String,
            mesh: String,
            shoulders: Vec<JointSpec>,
            ground_z: f64,
        }
        #[derive(Deserialize)]
        struct LimbEntry {
            id: String,
            mesh: String,
            knee_local: Option<Point3<f64>>,
        }
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(dir.join("repository.json"))?)?;
        for b in manifest.bodies {
            let mesh = load_mesh(&dir.join(&b.mesh), MeshFormat::Stl, 1.0)?;
            self.bodies.insert(
                b.id.clone(),
                BodyGeometry { id: b.id, mesh, shoulders: b.shoulders, ground_z: b.ground_z },
            );
        }
        for (target, entries) in
            [(&mut self.uppers, manifest.uppers), (&mut self.lowers, manifest.lowers)]
        {
            for l in entries {
                let mesh = load_mesh(&dir.join(&l.mesh), MeshFormat::Stl, 1.0)?;
                target.insert(
                    l.id.clone(),
                    LimbGeometry { id: l.id, mesh, knee_local: l.knee_local },
                );
            }
        }
        Ok(())
    }
}

fn canonical_knee_frame() -> nalgebra::Rotation3<f64> {
    let z = nalgebra::Vector3::z();
    let x = nalgebra::Vector3::y();
    let y = z.cross(&x);
    nalgebra::Rotation3::from_matrix_unchecked(nalgebra::Matrix3::from_columns(&[x, y, z]))
}

/// Reconstructs the separation planes from the shoulder origins (they lie
/// on those planes by construction).
fn separation_planes_of(shoulders: &[JointSpec]) -> (crate::mesh::Plane, crate::mesh::Plane) {
    let front_y = shoulders[LegTag::FrontLeft.index()].origin.y;
    let rear_y = shoulders[LegTag::RearLeft.index()].origin.y;
    (
        crate::mesh::Plane::axis_aligned(1, front_y),
        crate::mesh::Plane::axis_aligned(1, rear_y),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evo::genome::{Lineage, OperationTag};
    use crate::segmentation::{orient_canonical, segment, Axis, SegmentationConfig, UpAxis};
    use crate::shapes::{synthetic_quadruped, QuadrupedParams};
    use approx::assert_relative_eq;

    fn creature_partition() -> BodyPartition {
        let raw = synthetic_quadruped(&QuadrupedParams::default());
        let (mesh, _) = orient_canonical(&raw, UpAxis::Z).unwrap();
        let mesh = crate::mesh::scale_to_volume(&mesh, 6.3e-3).unwrap();
        segment(&mesh, &SegmentationConfig::default()).unwrap().0
    }

    fn genome(repo_source: &str) -> RobotGenome {
        RobotGenome {
            source_id: repo_source.into(),
            body_choice: DesignRepository::body_id(repo_source),
            upper_choice: DesignRepository::limb_id(repo_source, LimbLevel::Upper),
            lower_choice: DesignRepository::limb_id(repo_source, LimbLevel::Lower),
            leg_scale_index: 0,
            shoulder_axis: Axis::X,
            knee_axis: Axis::Y,
            lineage: Lineage { parents: vec![], op: OperationTag::Init },
        }
    }

    #[test]
    fn realized_robot_matches_the_source_partition() {
        let partition = creature_partition();
        let mut repo = DesignRepository::default();
        repo.ingest_partition("creature", &partition).unwrap();
        let model = repo
            .realize(&genome("creature"), &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap();
        model.validate().unwrap();
        // Front-left limbs reproduce the partition bit-for-bit in volume;
        // right limbs mirror it.
        let src = partition.leg(LegTag::FrontLeft);
        let fl_upper = &model.links[KineticRobotModel::upper_link(LegTag::FrontLeft)];
        assert_relative_eq!(
            fl_upper.mesh.signed_volume(),
            src.upper.signed_volume(),
            max_relative = 1e-9
        );
        let fr_lower = &model.links[KineticRobotModel::lower_link(LegTag::FrontRight)];
        let src_fr = partition.leg(LegTag::FrontRight);
        assert_relative_eq!(
            fr_lower.mesh.signed_volume(),
            src_fr.lower.signed_volume(),
            max_relative = 0.02
        );
        // Knee origins land back where segmentation put them.
        for tag in LegTag::ALL {
            let got = model.joints[KineticRobotModel::knee_joint(tag)].spec.origin;
            let expect = partition.leg(tag).knee.origin;
            assert!((got - expect).norm() < 2e-3, "{}: {got:?} vs {expect:?}", tag.name());
        }
        // All four legs carry the genome's per-level axes.
        for tag in LegTag::ALL {
            assert_eq!(
                model.joints[KineticRobotModel::shoulder_joint(tag)].spec.rotation_axis,
                Axis::X
            );
            assert_eq!(model.joints[KineticRobotModel::knee_joint(tag)].spec.rotation_axis, Axis::Y);
        }
    }

    #[test]
    fn scale_index_elongates_realized_legs() {
        let partition = creature_partition();
        let mut repo = DesignRepository::default();
        repo.ingest_partition("creature", &partition).unwrap();
        let mut g = genome("creature");
        g.leg_scale_index = 4;
        let base = repo
            .realize(&genome("creature"), &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap();
        let long = repo
            .realize(&g, &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap();
        let li = KineticRobotModel::lower_link(LegTag::RearRight);
        let drop = base.links[li].mesh.bounding_box().unwrap().0.z
            - long.links[li].mesh.bounding_box().unwrap().0.z;
        assert_relative_eq!(drop, 0.020, epsilon = 1e-6);
    }

    #[test]
    fn repository_round_trips_through_a_directory() {
        let partition = creature_partition();
        let mut repo = DesignRepository::default();
        repo.ingest_partition("creature", &partition).unwrap();
        let dir = tempfile::tempdir().unwrap();
        repo.save_dir(dir.path()).unwrap();
        let mut loaded = DesignRepository::default();
        loaded.load_dir(dir.path()).unwrap();
        let a = repo
            .realize(&genome("creature"), &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap();
        let b = loaded
            .realize(&genome("creature"), &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap();
        assert_relative_eq!(a.total_mass(), b.total_mass(), max_relative = 1e-6);
    }

    #[test]
    fn unknown_ids_are_config_errors() {
        let repo = DesignRepository::default();
        let err = repo
            .realize(&genome("ghost"), &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
