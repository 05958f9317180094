//! Mass properties by signed-tetrahedron integration over a closed surface.

use nalgebra::{Matrix3, Point3, Vector3};

use super::{MassProperties, TriangleMesh};
use crate::error::{Error, Result};

/// Volume threshold below which a mesh counts as degenerate, m³.
const MIN_VOLUME: f64 = 1e-15;

/// Computes volume, center of mass, and inertia (about the COM) of a
/// watertight mesh under uniform `density`, by summing signed tetrahedra
/// spanned by each triangle and the origin.
///
/// Fails with [`Error::InvertedOrientation`] when the net signed volume is
/// negative (inward winding) and with [`Error::DegenerateMesh`] when it is
/// ~zero.
pub fn mass_properties(mesh: &TriangleMesh, density: f64) -> Result<MassProperties> {
    if mesh.is_empty() {
        return Err(Error::DegenerateMesh("mass properties of empty mesh".into()));
    }
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::Config(format!("density must be positive, got {density}")));
    }

    let mut volume = 0.0;
    let mut first_moment = Vector3::zeros();
    // Second moments P_ij = ∫ x_i x_j dV accumulated about the origin.
    let mut second = Matrix3::zeros();

    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle_points(t);
        let v = a.coords.dot(&b.coords.cross(&c.coords)) / 6.0;
        volume += v;

        let s = a.coords + b.coords + c.coords;
        first_moment += s * (v / 4.0);

        // ∫ x_i x_j over the tetra (origin, a, b, c):
        //   V/20 · (Σ_k p_k,i p_k,j + s_i s_j)
        let mut p = Matrix3::zeros();
        for q in [&a.coords, &b.coords, &c.coords] {
            p += q * q.transpose();
        }
        p += s * s.transpose();
        second += p * (v / 20.0);
    }

    if volume < -MIN_VOLUME {
        return Err(Error::InvertedOrientation { volume });
    }
    if volume.abs() <= MIN_VOLUME {
        return Err(Error::DegenerateMesh(format!("mesh volume {volume} is ~zero")));
    }

    let com = Point3::from(first_moment / volume);
    // Inertia about the origin for unit density, then shift to the COM.
    let inertia_origin = Matrix3::identity() * second.trace() - second;
    let d = com.coords;
    let shift = Matrix3::identity() * d.norm_squared() - d * d.transpose();
    let inertia_com = (inertia_origin - shift * volume) * density;
    let mass = density * volume;

    Ok(MassProperties { volume, center_of_mass: com, inertia_tensor: inertia_com, mass })
}

/// Uniformly scales the mesh about its center of mass so that its volume
/// becomes `target_volume`.
pub fn scale_to_volume(mesh: &TriangleMesh, target_volume: f64) -> Result<TriangleMesh> {
    if !(target_volume.is_finite() && target_volume > 0.0) {
        return Err(Error::Config(format!(
            "target volume must be positive, got {target_volume}"
        )));
    }
    let props = mass_properties(mesh, 1.0)?;
    let factor = (target_volume / props.volume).cbrt();
    Ok(mesh.scaled_about(props.center_of_mass, factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{cube, icosphere};
    use approx::assert_relative_eq;
    use nalgebra::UnitQuaternion;
    use rand::{Rng, SeedableRng};

    #[test]
    fn unit_cube_mass_properties() {
        let mesh = cube(1.0).translated(Vector3::new(0.5, 0.5, 0.5));
        let p = mass_properties(&mesh, 1000.0).unwrap();
        assert_relative_eq!(p.volume, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.center_of_mass.x, 0.5, epsilon = 1e-12);
        assert_relative_eq!(p.center_of_mass.y, 0.5, epsilon = 1e-12);
        assert_relative_eq!(p.center_of_mass.z, 0.5, epsilon = 1e-12);
        assert_relative_eq!(p.mass, 1000.0, epsilon = 1e-9);
        // Solid cube about its COM: m·a²/6 on the diagonal.
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1000.0 / 6.0 } else { 0.0 };
                assert_relative_eq!(p.inertia_tensor[(i, j)], expect, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn icosphere_volume_within_half_percent() {
        let mesh = icosphere(0.1, 4);
        let p = mass_properties(&mesh, 1.0).unwrap();
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.001;
        assert!(
            (p.volume - exact).abs() / exact < 0.005,
            "volume {} vs analytic {}",
            p.volume,
            exact
        );
        // Solid sphere: 2/5 m r².
        let m = p.mass;
        assert_relative_eq!(
            p.inertia_tensor[(0, 0)],
            0.4 * m * 0.1 * 0.1,
            max_relative = 0.01
        );
    }

    #[test]
    fn flipped_winding_is_orientation_error() {
        let mut mesh = cube(1.0);
        for t in &mut mesh.triangles {
            t.swap(1, 2);
        }
        let err = mass_properties(&mesh, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvertedOrientation { .. }));
    }

    #[test]
    fn rotation_equivariance() {
        let mesh = cube(0.4).translated(Vector3::new(0.3, -0.2, 0.7));
        let base = mass_properties(&mesh, 500.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let axis = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let q = UnitQuaternion::from_scaled_axis(axis);
            let rotated = mesh.rotated(&q);
            let p = mass_properties(&rotated, 500.0).unwrap();
            let r = q.to_rotation_matrix();
            let expected_com = q.transform_point(&base.center_of_mass);
            let expected_inertia = r.matrix() * base.inertia_tensor * r.matrix().transpose();
            assert_relative_eq!(p.volume, base.volume, max_relative = 1e-9);
            assert_relative_eq!(
                (p.center_of_mass - expected_com).norm(),
                0.0,
                epsilon = 1e-9
            );
            assert_relative_eq!(
                (p.inertia_tensor - expected_inertia).norm(),
                0.0,
                epsilon = 1e-9 * base.inertia_tensor.norm()
            );
        }
    }

    #[test]
    fn scale_to_volume_cube_root_factor() {
        let mesh = cube(2.0); // volume 8
        let scaled = scale_to_volume(&mesh, 1.0).unwrap();
        let (min, max) = scaled.bounding_box().unwrap();
        assert_relative_eq!(max.x - min.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(scaled.signed_volume(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn scale_to_volume_is_idempotent() {
        let mesh = icosphere(0.07, 2);
        let once = scale_to_volume(&mesh, 6.3e-3).unwrap();
        let twice = scale_to_volume(&once, 6.3e-3).unwrap();
        let v1 = once.signed_volume();
        let v2 = twice.signed_volume();
        assert_relative_eq!(v1, 6.3e-3, max_relative = 1e-9);
        assert_relative_eq!(v2 / v1, 1.0, epsilon = 1e-9);
    }
}
