//! Parametric quadruped creature: an organic solid built from an ellipsoid
//! torso and four slanted legs with calf and foot bulges, meshed watertight.
//!
//! This is the reference input for the segmentation pipeline: every feature
//! coordinate (leg positions, calf height, torso extent) is known by
//! construction, so tests can check pipeline output against the generating
//! parameters.

use nalgebra::{Point3, Vector3};

use super::sdf::Sdf;
use super::surface_nets::mesh_sdf;
use crate::mesh::TriangleMesh;

/// Quadruped creature parameters, meters. `x` is lateral, `y` longitudinal,
/// `z` up; the creature is bilaterally symmetric about x = 0 unless a leg
/// modifier says otherwise.
#[derive(Debug, Clone)]
pub struct QuadrupedParams {
    pub torso_center_z: f64,
    pub torso_radii: Vector3<f64>,
    /// Hip end of each leg (top, buried in the torso): |x|, |y|, z.
    pub hip: Vector3<f64>,
    /// Ankle end of each leg: |x|, |y|, z.
    pub ankle: Vector3<f64>,
    /// Leg radius at the hip end; legs taper linearly to `ankle_radius`.
    pub hip_radius: f64,
    pub ankle_radius: f64,
    /// Calf bulge sphere: placed on the leg axis at this height.
    pub calf_z: f64,
    pub calf_radius: f64,
    /// Foot bulb sphere at the ankle xy, this height.
    pub foot_z: f64,
    pub foot_radius: f64,
    /// Blend radius of the smooth union.
    pub blend: f64,
    /// Add a thin tail capsule off the rear tip.
    pub tail: bool,
    /// Skip generating this leg (0 = front-left, 1 = front-right,
    /// 2 = rear-left, 3 = rear-right); breaks bilateral symmetry.
    pub drop_leg: Option<usize>,
    /// Add a disjoint floating sphere (connectivity-filter fixture).
    pub extra_blob: bool,
    /// Surface-nets cell size.
    pub cell: f64,
}

impl Default for QuadrupedParams {
    fn default() -> Self {
        Self {
            torso_center_z: 0.135,
            torso_radii: Vector3::new(0.055, 0.102, 0.05),
            hip: Vector3::new(0.028, 0.088, 0.134),
            ankle: Vector3::new(0.048, 0.172, 0.030),
            hip_radius: 0.013,
            ankle_radius: 0.020,
            calf_z: 0.072,
            calf_radius: 0.028,
            foot_z: 0.022,
            foot_radius: 0.026,
            blend: 0.006,
            tail: false,
            drop_leg: None,
            extra_blob: false,
            cell: 0.004,
        }
    }
}

impl QuadrupedParams {
    /// Signed x/y for legs 0..4 in (front-left, front-right, rear-left,
    /// rear-right) order: left is -x, front is +y.
    fn leg_signs(leg: usize) -> (f64, f64) {
        match leg {
            0 => (-1.0, 1.0),
            1 => (1.0, 1.0),
            2 => (-1.0, -1.0),
            _ => (1.0, -1.0),
        }
    }

    /// Builds the signed distance solid.
    pub fn sdf(&self) -> Sdf {
        let mut items = vec![Sdf::Ellipsoid {
            center: Point3::new(0.0, 0.0, self.torso_center_z),
            radii: self.torso_radii,
        }];
        for leg in 0..4 {
            if self.drop_leg == Some(leg) {
                continue;
            }
            let (sx, sy) = Self::leg_signs(leg);
            let top = Point3::new(sx * self.hip.x, sy * self.hip.y, self.hip.z);
            let bot = Point3::new(sx * self.ankle.x, sy * self.ankle.y, self.ankle.z);
            items.push(Sdf::RoundCone {
                a: top,
                b: bot,
                r_a: self.hip_radius,
                r_b: self.ankle_radius,
            });
            // Calf bulge on the leg axis.
            let t = ((self.calf_z - top.z) / (bot.z - top.z)).clamp(0.0, 1.0);
            let calf = top + (bot - top) * t;
            items.push(Sdf::Sphere { center: calf, radius: self.calf_radius });
            items.push(Sdf::Sphere {
                center: Point3::new(bot.x, bot.y, self.foot_z),
                radius: self.foot_radius,
            });
        }
        if self.tail {
            let rear = Point3::new(0.0, -self.torso_radii.y + 0.01, self.torso_center_z + 0.01);
            let tip = Point3::new(0.0, -self.torso_radii.y - 0.05, self.torso_center_z + 0.03);
            items.push(Sdf::Capsule { a: rear, b: tip, radius: 0.008 });
        }
        let solid = Sdf::SmoothUnion { k: self.blend, items };
        if self.extra_blob {
            let (_, hi) = solid.bounds();
            Sdf::Union(vec![
                solid,
                Sdf::Sphere { center: Point3::new(0.0, hi.y + 0.06, 0.1), radius: 0.02 },
            ])
        } else {
            solid
        }
    }
}

/// Generates a watertight quadruped creature mesh.
pub fn synthetic_quadruped(params: &QuadrupedParams) -> TriangleMesh {
    mesh_sdf(&params.sdf(), params.cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{connected_components, is_watertight};

    #[test]
    fn default_creature_is_one_watertight_component() {
        let m = synthetic_quadruped(&QuadrupedParams::default());
        assert!(is_watertight(&m));
        assert_eq!(connected_components(&m).len(), 1);
        assert!(m.signed_volume() > 1e-4);
    }

    #[test]
    fn extra_blob_adds_a_component() {
        // Cells must stay below ~half the thinnest feature (hip cones),
        // or the nets fuse sheets into non-manifold edges.
        let m = synthetic_quadruped(&QuadrupedParams {
            extra_blob: true,
            ..QuadrupedParams::default()
        });
        assert!(is_watertight(&m));
        assert_eq!(connected_components(&m).len(), 2);
    }
}
