//! Shoulder and knee joint placement from cross-section centroids.

use nalgebra::{Matrix3, Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::{LegTag, SegmentationConfig};
use crate::error::{Error, Result};
use crate::mesh::{cross_section, CrossSection, Plane, TriangleMesh};

/// Joint rotation axis, one of the joint-frame axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Axis {
    #[default]
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn unit(self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "x" | "X" => Some(Axis::X),
            "y" | "Y" => Some(Axis::Y),
            "z" | "Z" => Some(Axis::Z),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JointKind {
    Shoulder,
    Knee,
}

/// A joint: origin, right-handed orthonormal frame, and the frame axis it
/// rotates about.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub origin: Point3<f64>,
    pub frame: Rotation3<f64>,
    pub kind: JointKind,
    pub rotation_axis: Axis,
}

impl JointSpec {
    pub fn from_axes(
        origin: Point3<f64>,
        x: Vector3<f64>,
        y: Vector3<f64>,
        z: Vector3<f64>,
        kind: JointKind,
    ) -> Result<Self> {
        let m = Matrix3::from_columns(&[x, y, z]);
        let spec = JointSpec {
            origin,
            frame: Rotation3::from_matrix_unchecked(m),
            kind,
            rotation_axis: Axis::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Orthonormal within 1e-9 and right-handed (x × y = z).
    pub fn validate(&self) -> Result<()> {
        let m = self.frame.matrix();
        let x = m.column(0);
        let y = m.column(1);
        let z = m.column(2);
        let tol = 1e-9;
        let ortho = (x.norm() - 1.0).abs() < tol
            && (y.norm() - 1.0).abs() < tol
            && (z.norm() - 1.0).abs() < tol
            && x.dot(&y).abs() < tol
            && y.dot(&z).abs() < tol
            && x.dot(&z).abs() < tol;
        let right_handed = (x.cross(&y) - z).norm() < tol;
        if !ortho || !right_handed {
            return Err(Error::Segmentation(format!(
                "joint frame is not a right-handed orthonormal triad: {m:?}"
            )));
        }
        Ok(())
    }

    /// Rotation axis as a world-frame unit vector.
    pub fn world_axis(&self) -> Vector3<f64> {
        self.frame * self.rotation_axis.unit()
    }
}

/// Shoulder frame for a separation plane on the `front` (+y) or rear side:
/// z outward (away from the COM), y straight down, x completing the triad.
fn shoulder_frame(front: bool) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let z = if front { Vector3::y() } else { -Vector3::y() };
    let y = -Vector3::z();
    let x = y.cross(&z);
    (x, y, z)
}

/// Knee frame: z up (the slicing-plane normal), x along the facing
/// direction, y completing the triad.
fn knee_frame() -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let z = Vector3::z();
    let x = Vector3::y();
    let y = z.cross(&x);
    (x, y, z)
}

/// Places the four shoulder joints on the two separation planes.
///
/// Each plane's two largest-area section loops give the two shoulder
/// origins at their centroids; left/right tags follow centroid x (right is
/// +x when facing +y). Returns joints in [`LegTag::ALL`] order plus the
/// sections for reporting.
pub fn place_shoulder_joints(
    mesh: &TriangleMesh,
    planes: (&Plane, &Plane),
) -> Result<([JointSpec; 4], [CrossSection; 2])> {
    let mut out: [Option<JointSpec>; 4] = [None; 4];
    let mut sections: Vec<CrossSection> = Vec::with_capacity(2);
    for plane in [planes.0, planes.1] {
        let front = plane.point.y > 0.0;
        let cs = cross_section(mesh, plane);
        let order = cs.loops_by_area_desc();
        if order.len() < 2 {
            return Err(Error::Segmentation(format!(
                "separation plane at y = {:.4} has {} section loop(s); need 2 legs",
                plane.point.y,
                order.len()
            )));
        }
        let mut picks = [order[0], order[1]];
        // Left/right by centroid x: ascending x = (left, right).
        picks.sort_by(|&a, &b| {
            cs.loop_centroid_world(a)
                .x
                .total_cmp(&cs.loop_centroid_world(b).x)
        });
        let (x, y, z) = shoulder_frame(front);
        for (slot, &loop_idx) in picks.iter().enumerate() {
            let right = slot == 1;
            let tag = match (front, right) {
                (true, false) => LegTag::FrontLeft,
                (true, true) => LegTag::FrontRight,
                (false, false) => LegTag::RearLeft,
                (false, true) => LegTag::RearRight,
            };
            let origin = cs.loop_centroid_world(loop_idx);
            out[tag.index()] =
                Some(JointSpec::from_axes(origin, x, y, z, JointKind::Shoulder)?);
        }
        sections.push(cs);
    }
    let joints = [
        out[0].expect("front plane placed"),
        out[1].expect("front plane placed"),
        out[2].expect("rear plane placed"),
        out[3].expect("rear plane placed"),
    ];
    let rear = sections.pop().unwrap();
    let front = sections.pop().unwrap();
    Ok((joints, [front, rear]))
}

/// Places one knee: horizontal slices march down from `z_top` (the bottom
/// of the base link) to `ground_margin` above `mesh_min_z`; the slice of
/// maximum area gives the knee origin at its area-weighted centroid.
/// Constant profiles tie toward the highest slice.
pub fn place_knee_joints(
    leg: &TriangleMesh,
    z_top: f64,
    mesh_min_z: f64,
    config: &SegmentationConfig,
) -> Result<(JointSpec, Vec<(f64, f64)>)> {
    let z_stop = mesh_min_z + config.ground_margin;
    if z_top <= z_stop {
        return Err(Error::Segmentation(format!(
            "knee traversal range is empty: base bottom {z_top:.4} is not above \
             ground margin {z_stop:.4}"
        )));
    }
    let step = config.knee_step;
    let mut best: Option<(f64, f64, Point3<f64>)> = None;
    let mut scanned: Vec<(f64, f64)> = Vec::new();
    let mut z = z_top;
    while z >= z_stop - 1e-12 {
        let cs = cross_section(leg, &Plane::axis_aligned(2, z));
        let area = cs.total_area;
        scanned.push((z, area));
        if area > 0.0 {
            // Area-weighted centroid over material loops.
            let mut cx = 0.0;
            let mut cy = 0.0;
            let mut aw = 0.0;
            for i in 0..cs.loops.len() {
                let a = cs.loop_areas[i];
                if a > 0.0 {
                    let c = cs.loop_centroid_world(i);
                    cx += a * c.x;
                    cy += a * c.y;
                    aw += a;
                }
            }
            if aw > 0.0 {
                let centroid = Point3::new(cx / aw, cy / aw, z);
                // Strictly-greater (beyond float noise) keeps the first,
                // i.e. highest, slice on constant profiles.
                if best.as_ref().map_or(true, |(_, ba, _)| area > ba * (1.0 + 1e-9)) {
                    best = Some((z, area, centroid));
                }
            }
        }
        z -= step;
    }
    let (_, _, origin) = best.ok_or_else(|| {
        Error::Segmentation("no horizontal slice intersects the leg in the knee range".into())
    })?;
    let (x, y, z_axis) = knee_frame();
    let spec = JointSpec::from_axes(origin, x, y, z_axis, JointKind::Knee)?;
    Ok((spec, scanned))
}
