//! Full partitioning pass: separation planes → base + leg pieces → joint
//! placement → limb splitting with motor clearance trims.

use serde::{Deserialize, Serialize};

use super::joints::{place_knee_joints, place_shoulder_joints, JointSpec};
use super::planes::{find_separation_planes, SliceScan};
use super::{LegTag, SegmentationConfig};
use crate::error::{Error, Result};
use crate::mesh::{connected_components, plane_cut, KeepSide, Plane, TriangleMesh};

/// One leg: its two limb meshes and two joints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LegSegment {
    pub tag: LegTag,
    pub upper: TriangleMesh,
    pub lower: TriangleMesh,
    pub shoulder: JointSpec,
    pub knee: JointSpec,
}

/// Base link plus four legs, in [`LegTag::ALL`] order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyPartition {
    pub base_link: TriangleMesh,
    pub legs: Vec<LegSegment>,
    pub separation_planes: (Plane, Plane),
    /// Lowest z of the source mesh (the ground reference).
    pub ground_z: f64,
}

impl BodyPartition {
    pub fn leg(&self, tag: LegTag) -> &LegSegment {
        &self.legs[tag.index()]
    }

    /// Structural invariants: exactly four legs, mirrored planes, valid
    /// right-handed frames, knees strictly below shoulders and above the
    /// ground margin.
    pub fn validate(&self, config: &SegmentationConfig) -> Result<()> {
        if self.legs.len() != 4 {
            return Err(Error::Assembly(format!("{} legs, need 4", self.legs.len())));
        }
        let (front, rear) = &self.separation_planes;
        if (front.point.y + rear.point.y).abs() > 1e-6 {
            return Err(Error::Assembly(format!(
                "separation planes are not mirrored: {} vs {}",
                front.point.y, rear.point.y
            )));
        }
        for leg in &self.legs {
            leg.shoulder.validate()?;
            leg.knee.validate()?;
            if leg.knee.origin.z >= leg.shoulder.origin.z {
                return Err(Error::Assembly(format!(
                    "{}: knee z {:.4} is not below shoulder z {:.4}",
                    leg.tag.name(),
                    leg.knee.origin.z,
                    leg.shoulder.origin.z
                )));
            }
            if leg.knee.origin.z < self.ground_z + config.ground_margin - 1e-9 {
                return Err(Error::Assembly(format!(
                    "{}: knee z {:.4} is under the {} m ground margin",
                    leg.tag.name(),
                    leg.knee.origin.z,
                    config.ground_margin
                )));
            }
        }
        Ok(())
    }
}

/// Loop bookkeeping for one separation plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneLoops {
    pub y: f64,
    pub loop_areas: Vec<f64>,
    /// Indices of the two chosen (leg) loops, left then right.
    pub chosen: [usize; 2],
    pub extra_loops: usize,
}

/// Everything the segmentation pass measured, for debugging and plots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub scan: SliceScan,
    pub plane_sections: [PlaneLoops; 2],
    /// Knee scan (z, area) per leg in tag order.
    pub knee_scans: Vec<Vec<(f64, f64)>>,
    pub reattached_components: usize,
    pub secondary_splits: usize,
    pub volume_whole: f64,
    pub volume_parts: f64,
    pub volume_trimmed: f64,
}

/// Segments a canonical watertight mesh into a [`BodyPartition`].
pub fn segment(
    mesh: &TriangleMesh,
    config: &SegmentationConfig,
) -> Result<(BodyPartition, SegmentationReport)> {
    let (front_plane, rear_plane, scan) = find_separation_planes(mesh, config)?;
    let (shoulders, sections) = place_shoulder_joints(mesh, (&front_plane, &rear_plane))?;

    let (mesh_min, _) = mesh.bounding_box().expect("non-empty mesh");
    let ground_z = mesh_min.z;
    let volume_whole = mesh.signed_volume();

    // Base slab between the planes; leg stock beyond them.
    let mut base = plane_cut(
        &plane_cut(mesh, &front_plane, KeepSide::Negative)?,
        &rear_plane,
        KeepSide::Positive,
    )?;
    let front_stock = plane_cut(mesh, &front_plane, KeepSide::Positive)?;
    let rear_stock = plane_cut(mesh, &rear_plane, KeepSide::Negative)?;

    let mut reattached = 0usize;
    let mut secondary_splits = 0usize;
    let mut plane_loops: Vec<PlaneLoops> = Vec::with_capacity(2);
    let mut leg_meshes: [Option<TriangleMesh>; 4] = [None, None, None, None];

    for (stock, section, front) in
        [(&front_stock, &sections[0], true), (&rear_stock, &sections[1], false)]
    {
        let order = section.loops_by_area_desc();
        let mut picks = [order[0], order[1]];
        picks.sort_by(|&a, &b| {
            section
                .loop_centroid_world(a)
                .x
                .total_cmp(&section.loop_centroid_world(b).x)
        });
        plane_loops.push(PlaneLoops {
            y: section.plane.point.y,
            loop_areas: section.loop_areas.clone(),
            chosen: picks,
            extra_loops: section.loops.len() - 2,
        });

        let comps = connected_components(stock);
        let comp_of_loop = |loop_idx: usize| -> usize {
            let probe = section.plane.unproject(section.loops[loop_idx][0]);
            let mut best = (f64::INFINITY, 0usize);
            for (ci, tris) in comps.iter().enumerate() {
                for &ti in tris {
                    for p in stock.triangle_points(ti) {
                        let d = (p - probe).norm_squared();
                        if d < best.0 {
                            best = (d, ci);
                        }
                    }
                }
            }
            best.1
        };
        let left_comp = comp_of_loop(picks[0]);
        let right_comp = comp_of_loop(picks[1]);
        let tags = if front {
            [LegTag::FrontLeft, LegTag::FrontRight]
        } else {
            [LegTag::RearLeft, LegTag::RearRight]
        };

        let mut used = vec![false; comps.len()];
        if left_comp == right_comp {
            // Webbed legs: split the shared component at the mid x of the
            // two loop centroids.
            let cl = section.loop_centroid_world(picks[0]);
            let cr = section.loop_centroid_world(picks[1]);
            let mid = Plane::axis_aligned(0, 0.5 * (cl.x + cr.x));
            let shared = submesh_of(stock, &comps[left_comp]);
            leg_meshes[tags[0].index()] =
                Some(plane_cut(&shared, &mid, KeepSide::Negative)?);
            leg_meshes[tags[1].index()] =
                Some(plane_cut(&shared, &mid, KeepSide::Positive)?);
            used[left_comp] = true;
            secondary_splits += 1;
        } else {
            leg_meshes[tags[0].index()] = Some(submesh_of(stock, &comps[left_comp]));
            leg_meshes[tags[1].index()] = Some(submesh_of(stock, &comps[right_comp]));
            used[left_comp] = true;
            used[right_comp] = true;
        }
        // Everything else beyond the plane (heads, tails) goes back to the
        // base link.
        for (ci, tris) in comps.iter().enumerate() {
            if !used[ci] {
                base.append(&submesh_of(stock, tris));
                reattached += 1;
            }
        }
    }

    let (base_min, _) = base.bounding_box().expect("non-empty base");
    let base_bottom = base_min.z;

    // Knees, then split each leg at its knee plane.
    let mut legs: Vec<LegSegment> = Vec::with_capacity(4);
    let mut knee_scans = Vec::with_capacity(4);
    for tag in LegTag::ALL {
        let leg_mesh = leg_meshes[tag.index()].take().expect("all legs assigned");
        let (knee, scan_z) = place_knee_joints(&leg_mesh, base_bottom, ground_z, config)?;
        knee_scans.push(scan_z);
        let shoulder = shoulders[tag.index()];
        let knee_plane = Plane::axis_aligned(2, knee.origin.z);
        let upper = plane_cut(&leg_mesh, &knee_plane, KeepSide::Positive)
            .map_err(|e| Error::Segmentation(format!("{}: upper split: {e}", tag.name())))?;
        let lower = plane_cut(&leg_mesh, &knee_plane, KeepSide::Negative)
            .map_err(|e| Error::Segmentation(format!("{}: lower split: {e}", tag.name())))?;
        legs.push(LegSegment { tag, upper, lower, shoulder, knee });
    }

    let partition = BodyPartition {
        base_link: base,
        legs,
        separation_planes: (front_plane, rear_plane),
        ground_z,
    };
    let (partition, volume_trimmed) = split_and_offset_limbs(partition, config.limb_offset)?;
    partition.validate(config)?;

    let volume_parts = partition.base_link.signed_volume()
        + partition
            .legs
            .iter()
            .map(|l| l.upper.signed_volume() + l.lower.signed_volume())
            .sum::<f64>();
    if (volume_whole - volume_parts - volume_trimmed).abs() > 0.01 * volume_whole {
        return Err(Error::Segmentation(format!(
            "volume accounting off: whole {volume_whole:.6e}, parts {volume_parts:.6e}, \
             trimmed {volume_trimmed:.6e}"
        )));
    }

    let report = SegmentationReport {
        scan,
        plane_sections: [plane_loops[0].clone(), plane_loops[1].clone()],
        knee_scans,
        reattached_components: reattached,
        secondary_splits,
        volume_whole,
        volume_parts,
        volume_trimmed,
    };
    Ok((partition, report))
}

/// Trims a motor-clearance slab of thickness `offset` off each limb on its
/// joint side: uppers recede from the separation plane, lowers from the
/// knee plane. Joint origins are untouched. Returns the partition and the
/// total trimmed volume.
pub fn split_and_offset_limbs(
    partition: BodyPartition,
    offset: f64,
) -> Result<(BodyPartition, f64)> {
    if offset == 0.0 {
        return Ok((partition, 0.0));
    }
    if offset < 0.0 {
        return Err(Error::Config(format!("limb offset must be >= 0, got {offset}")));
    }
    let mut trimmed = 0.0;
    let mut legs = Vec::with_capacity(partition.legs.len());
    for leg in partition.legs {
        let sep_y = if leg.tag.is_front() {
            partition.separation_planes.0.point.y
        } else {
            partition.separation_planes.1.point.y
        };
        let outward = if leg.tag.is_front() { 1.0 } else { -1.0 };
        let shoulder_trim = Plane::axis_aligned(1, sep_y + outward * offset);
        let keep = if leg.tag.is_front() { KeepSide::Positive } else { KeepSide::Negative };
        let upper_before = leg.upper.signed_volume();
        let upper = plane_cut(&leg.upper, &shoulder_trim, keep).map_err(|_| {
            Error::Segmentation(format!(
                "{}: shoulder clearance of {offset} m consumes the upper limb",
                leg.tag.name()
            ))
        })?;
        trimmed += upper_before - upper.signed_volume();

        let knee_trim = Plane::axis_aligned(2, leg.knee.origin.z - offset);
        let lower_before = leg.lower.signed_volume();
        let lower = plane_cut(&leg.lower, &knee_trim, KeepSide::Negative).map_err(|_| {
            Error::Segmentation(format!(
                "{}: knee clearance of {offset} m consumes the lower limb",
                leg.tag.name()
            ))
        })?;
        trimmed += lower_before - lower.signed_volume();

        legs.push(LegSegment { upper, lower, ..leg });
    }
    Ok((
        BodyPartition {
            base_link: partition.base_link,
            legs,
            separation_planes: partition.separation_planes,
            ground_z: partition.ground_z,
        },
        trimmed,
    ))
}

fn submesh_of(mesh: &TriangleMesh, triangle_ids: &[usize]) -> TriangleMesh {
    crate::mesh::submesh(mesh, triangle_ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{cylinder, synthetic_quadruped, QuadrupedParams};

    fn canonical_creature() -> TriangleMesh {
        let raw = synthetic_quadruped(&QuadrupedParams::default());
        let (oriented, _) =
            crate::segmentation::orient_canonical(&raw, crate::segmentation::UpAxis::Z).unwrap();
        oriented
    }

    #[test]
    fn creature_segments_into_four_legs() {
        let mesh = canonical_creature();
        let cfg = SegmentationConfig::default();
        let (partition, report) = segment(&mesh, &cfg).unwrap();
        assert_eq!(partition.legs.len(), 4);
        partition.validate(&cfg).unwrap();
        assert!(report.volume_whole > 0.0);
        for leg in &partition.legs {
            assert!(crate::mesh::is_watertight(&leg.upper), "{:?} upper", leg.tag);
            assert!(crate::mesh::is_watertight(&leg.lower), "{:?} lower", leg.tag);
            assert!(leg.upper.signed_volume() > 0.0);
            assert!(leg.lower.signed_volume() > 0.0);
        }
        assert!(crate::mesh::is_watertight(&partition.base_link));
    }

    #[test]
    fn trim_shortens_a_cylinder_limb_by_the_offset() {
        // A 0.10 m lower limb hanging below its knee plane at z = 0.10.
        let leg = cylinder(0.02, 0.0, 0.10, 32);
        let knee = place_knee_joints(&leg, 0.10, 0.0, &SegmentationConfig::default())
            .map(|(k, _)| k)
            .unwrap();
        let shoulder = JointSpec::from_axes(
            nalgebra::Point3::new(0.0, 0.0, 0.2),
            nalgebra::Vector3::x(),
            -nalgebra::Vector3::z(),
            nalgebra::Vector3::y(),
            super::super::JointKind::Shoulder,
        )
        .unwrap();
        // Upper limbs span well past the shoulder trim plane at |y| ≈ 0.09.
        let dummy_upper = |front: bool| {
            let y = if front { 0.13 } else { -0.13 };
            crate::shapes::cuboid(nalgebra::Vector3::new(0.02, 0.07, 0.01))
                .translated(nalgebra::Vector3::new(0.0, y, 0.11))
        };
        let partition = BodyPartition {
            base_link: cylinder(0.05, 0.12, 0.2, 16),
            legs: LegTag::ALL
                .iter()
                .map(|&tag| LegSegment {
                    tag,
                    upper: dummy_upper(tag.is_front()),
                    lower: leg.clone(),
                    shoulder,
                    knee: JointSpec { origin: nalgebra::Point3::new(0.0, 0.0, 0.10), ..knee },
                })
                .collect(),
            separation_planes: (Plane::axis_aligned(1, 0.05), Plane::axis_aligned(1, -0.05)),
            ground_z: 0.0,
        };
        let (trimmed, _) = split_and_offset_limbs(partition, 0.04).unwrap();
        for leg in &trimmed.legs {
            let (min, max) = leg.lower.bounding_box().unwrap();
            let len = max.z - min.z;
            assert!((len - 0.06).abs() < 1e-3, "lower length {len}");
        }
    }

    #[test]
    fn zero_offset_is_identity() {
        let mesh = canonical_creature();
        let cfg = SegmentationConfig { limb_offset: 0.0, ..SegmentationConfig::default() };
        let (partition, _) = segment(&mesh, &cfg).unwrap();
        let before: Vec<usize> = partition.legs.iter().map(|l| l.upper.triangles.len()).collect();
        let (same, trimmed) = split_and_offset_limbs(partition, 0.0).unwrap();
        assert_eq!(trimmed, 0.0);
        let after: Vec<usize> = same.legs.iter().map(|l| l.upper.triangles.len()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn overlong_offset_fails() {
        let mesh = canonical_creature();
        let cfg = SegmentationConfig { limb_offset: 0.25, ..SegmentationConfig::default() };
        let err = segment(&mesh, &cfg).unwrap_err();
        assert!(matches!(err, Error::Segmentation(_)), "got {err:?}");
    }
}
