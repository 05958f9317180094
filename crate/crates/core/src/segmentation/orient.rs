//! Canonical orientation pass.

use nalgebra::{Matrix2, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mesh::{mass_properties, TriangleMesh};

/// Which source axis points up in the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum UpAxis {
    #[default]
    Z,
    Y,
}

/// What the orientation pass did.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalReport {
    /// Rotation applied about z to align the footprint's principal axis
    /// with +y, radians.
    pub yaw_applied: f64,
    /// Whether the heavy end was flipped to -y.
    pub flipped_heading: bool,
    /// Translation applied after rotation.
    pub translation: Vector3<f64>,
}

/// Rotates and translates a watertight mesh into the canonical frame:
/// up = +z, longitudinal axis = +y, center of mass on the z axis, min z
/// grounded at 0.
///
/// The longitudinal axis is the principal direction of the horizontal
/// footprint (area-weighted surface centroids projected to xy). The +y
/// heading is chosen so the footprint's heavier half lies behind (-y),
/// which is arbitrary but deterministic.
pub fn orient_canonical(
    mesh: &TriangleMesh,
    up: UpAxis,
) -> Result<(TriangleMesh, CanonicalReport)> {
    let mut work = match up {
        UpAxis::Z => mesh.clone(),
        // Rotate source +y up to +z up (x stays).
        UpAxis::Y => mesh.rotated(&UnitQuaternion::from_axis_angle(
            &Vector3::x_axis(),
            std::f64::consts::FRAC_PI_2,
        )),
    };

    // Area-weighted covariance of the xy footprint, integrated exactly
    // over each triangle: ∫ x_i x_j dA = A/12 · (Σ_k v_k,i v_k,j + s_i s_j).
    let mut total_w = 0.0;
    let mut mean = Vector2::zeros();
    for t in 0..work.triangles.len() {
        let [a, b, c] = work.triangle_points(t);
        let w = work.triangle_area(t);
        let centroid = (a.coords + b.coords + c.coords) / 3.0;
        mean += Vector2::new(centroid.x, centroid.y) * w;
        total_w += w;
    }
    mean /= total_w;
    let mut cov = Matrix2::zeros();
    for t in 0..work.triangles.len() {
        let pts = work.triangle_points(t);
        let w = work.triangle_area(t);
        let mut second = Matrix2::zeros();
        let mut s = Vector2::zeros();
        for p in &pts {
            let q = Vector2::new(p.x, p.y) - mean;
            second += q * q.transpose();
            s += q;
        }
        second += s * s.transpose();
        cov += second * (w / 12.0);
    }
    cov /= total_w;

    let eig = cov.symmetric_eigen();
    let major = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let axis = eig.eigenvectors.column(major).into_owned();
    // Rotate the major axis onto +y.
    let yaw = axis.x.atan2(axis.y);
    let mut applied_yaw = yaw;
    work = work.rotated(&UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw));

    // Deterministic heading: put the heavier footprint half at -y
    // (animal-like meshes carry more bulk in the torso/rear).
    let mut skew = 0.0;
    let mut total = 0.0;
    for t in 0..work.triangles.len() {
        let [a, b, c] = work.triangle_points(t);
        let w = work.triangle_area(t);
        let cy = (a.y + b.y + c.y) / 3.0;
        skew += w * cy;
        total += w;
    }
    let flipped = skew / total > 0.0;
    if flipped {
        work = work.rotated(&UnitQuaternion::from_axis_angle(
            &Vector3::z_axis(),
            std::f64::consts::PI,
        ));
        applied_yaw += std::f64::consts::PI;
    }

    let props = mass_properties(&work, 1.0)?;
    let (min, _) = work.bounding_box().expect("non-empty mesh");
    let translation =
        Vector3::new(-props.center_of_mass.x, -props.center_of_mass.y, -min.z);
    work.map_vertices(|p| p + translation);

    Ok((work, CanonicalReport { yaw_applied: applied_yaw, flipped_heading: flipped, translation }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::cuboid;
    use approx::assert_relative_eq;

    #[test]
    fn long_axis_lands_on_y_and_mesh_is_grounded() {
        // A box longest along x must get yawed onto y.
        let m = cuboid(Vector3::new(0.2, 0.05, 0.04)).translated(Vector3::new(1.0, 2.0, 3.0));
        let (out, report) = orient_canonical(&m, UpAxis::Z).unwrap();
        let (min, max) = out.bounding_box().unwrap();
        assert_relative_eq!(max.y - min.y, 0.4, epsilon = 1e-9);
        assert_relative_eq!(max.x - min.x, 0.1, epsilon = 1e-9);
        assert_relative_eq!(min.z, 0.0, epsilon = 1e-12);
        let props = mass_properties(&out, 1.0).unwrap();
        assert_relative_eq!(props.center_of_mass.x, 0.0, epsilon = 1e-9);
        assert_relative_eq!(props.center_of_mass.y, 0.0, epsilon = 1e-9);
        assert!(report.yaw_applied.abs() > 0.1);
    }

    #[test]
    fn y_up_source_is_stood_upright() {
        let m = cuboid(Vector3::new(0.05, 0.2, 0.1));
        let (out, _) = orient_canonical(&m, UpAxis::Y).unwrap();
        let (min, max) = out.bounding_box().unwrap();
        // Source y extent (0.4) becomes height z.
        assert_relative_eq!(max.z - min.z, 0.4, epsilon = 1e-9);
        assert!(out.signed_volume() > 0.0, "rotation kept orientation");
    }

    #[test]
    fn orientation_is_idempotent() {
        let m = cuboid(Vector3::new(0.03, 0.2, 0.05));
        let (once, _) = orient_canonical(&m, UpAxis::Z).unwrap();
        let (twice, report) = orient_canonical(&once, UpAxis::Z).unwrap();
        assert_relative_eq!(report.yaw_applied.sin(), 0.0, epsilon = 1e-6);
        for (a, b) in once.vertices.iter().zip(&twice.vertices) {
            assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-9);
        }
    }
}
