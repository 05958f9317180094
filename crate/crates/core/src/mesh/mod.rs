//! Triangle mesh substrate: indexed triangle soup with validation, repair,
//! mass properties, scaling, planar slicing, plane cuts, and a bilateral
//! symmetry score.
//!
//! Everything downstream (segmentation, assembly, simulation) operates on
//! [`TriangleMesh`]. Faces wind counter-clockwise seen from outside; a
//! repaired mesh is watertight and orientable: every edge is shared by
//! exactly two triangles with opposite winding.

mod cut;
mod io;
mod mass;
pub(crate) mod poly2d;
mod repair;
mod slice;
mod symmetry;
mod topology;

pub use cut::{plane_cut, KeepSide};
pub use io::{load_mesh, load_mesh_bytes, save_obj, save_stl_binary, MeshFormat};
pub use mass::{mass_properties, scale_to_volume};
pub use repair::{validate_and_repair, RepairOptions, RepairReport};
pub use slice::{area_profile, cross_section};
pub use symmetry::{bilateral_symmetry_score, SymmetrySampling};
pub use topology::{boundary_edge_count, connected_components, is_watertight};
pub(crate) use topology::submesh;

use nalgebra::{Matrix3, Point3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Indexed triangle mesh. Vertex coordinates are meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    /// Vertex index triples, CCW from outside.
    pub triangles: Vec<[u32; 3]>,
    /// Meters per model unit of the source file (already applied to
    /// `vertices`; kept for provenance).
    pub units_scale: f64,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Self {
        Self { vertices, triangles, units_scale: 1.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Checks every triangle references an existing vertex.
    pub fn indices_in_range(&self) -> bool {
        let n = self.vertices.len() as u32;
        self.triangles.iter().all(|t| t.iter().all(|&i| i < n))
    }

    /// Axis-aligned bounding box, `None` for an empty vertex set.
    pub fn bounding_box(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = *self.vertices.first()?;
        let mut min = first;
        let mut max = first;
        for v in &self.vertices {
            for k in 0..3 {
                min[k] = min[k].min(v[k]);
                max[k] = max[k].max(v[k]);
            }
        }
        Some((min, max))
    }

    pub fn triangle_points(&self, t: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Signed volume by the divergence theorem; positive iff outward winding.
    pub fn signed_volume(&self) -> f64 {
        let mut six_v = 0.0;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(t);
            six_v += a.coords.dot(&b.coords.cross(&c.coords));
        }
        six_v / 6.0
    }

    /// Applies `f` to every vertex in place.
    pub fn map_vertices(&mut self, mut f: impl FnMut(Point3<f64>) -> Point3<f64>) {
        for v in &mut self.vertices {
            *v = f(*v);
        }
    }

    pub fn translated(&self, d: Vector3<f64>) -> Self {
        let mut m = self.clone();
        m.map_vertices(|p| p + d);
        m
    }

    pub fn rotated(&self, q: &UnitQuaternion<f64>) -> Self {
        let mut m = self.clone();
        m.map_vertices(|p| q.transform_point(&p));
        m
    }

    /// Uniform scale about a fixed point.
    pub fn scaled_about(&self, center: Point3<f64>, factor: f64) -> Self {
        let mut m = self.clone();
        m.map_vertices(|p| center + (p - center) * factor);
        m
    }

    /// Mirror across the plane through `point` with unit `normal`,
    /// flipping triangle winding to keep outward orientation.
    pub fn mirrored(&self, point: Point3<f64>, normal: Unit<Vector3<f64>>) -> Self {
        let mut m = self.clone();
        m.map_vertices(|p| p - normal.into_inner() * (2.0 * (p - point).dot(&normal)));
        for t in &mut m.triangles {
            t.swap(1, 2);
        }
        m
    }

    /// Appends another mesh as extra connected component(s).
    pub fn append(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }
}

/// Volume, center of mass, and inertia of a watertight mesh under uniform
/// density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassProperties {
    /// m³
    pub volume: f64,
    /// m, in the mesh frame
    pub center_of_mass: Point3<f64>,
    /// kg·m², about the center of mass, mesh-frame axes
    pub inertia_tensor: Matrix3<f64>,
    /// kg
    pub mass: f64,
}

/// Oriented plane: a point on it plus its unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub point: Point3<f64>,
    pub normal: Unit<Vector3<f64>>,
}

impl Plane {
    pub fn new(point: Point3<f64>, normal: Vector3<f64>) -> Result<Self> {
        let n = normal.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::DegenerateMesh("plane normal has zero length".into()));
        }
        Ok(Self { point, normal: Unit::new_normalize(normal) })
    }

    /// Plane perpendicular to a coordinate axis at the given coordinate.
    pub fn axis_aligned(axis: usize, coord: f64) -> Self {
        let mut n = Vector3::zeros();
        n[axis] = 1.0;
        let mut p = Point3::origin();
        p[axis] = coord;
        Self { point: p, normal: Unit::new_unchecked(n) }
    }

    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        (p - self.point).dot(&self.normal)
    }

    /// Right-handed in-plane basis (u, v) with u × v = normal.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.normal.into_inner();
        let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = n.cross(&helper).normalize();
        let v = n.cross(&u);
        // n × u = v gives (u, v, n) right-handed: u × v = n.
        (u, v)
    }

    /// 2D plane coordinates of a 3D point.
    pub fn project(&self, p: &Point3<f64>) -> [f64; 2] {
        let (u, v) = self.basis();
        let d = p - self.point;
        [d.dot(&u), d.dot(&v)]
    }

    /// Inverse of [`Plane::project`].
    pub fn unproject(&self, uv: [f64; 2]) -> Point3<f64> {
        let (u, v) = self.basis();
        self.point + u * uv[0] + v * uv[1]
    }
}

/// Planar section of a mesh: closed intersection loops in plane coordinates.
///
/// Loop areas are signed by the solid-material convention: outer boundaries
/// of material are positive, interior holes negative, so `total_area` is the
/// material area of the section.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossSection {
    pub plane: Plane,
    /// Closed vertex rings in plane (u, v) coordinates.
    pub loops: Vec<Vec<[f64; 2]>>,
    /// m², signed per loop.
    pub loop_areas: Vec<f64>,
    /// Area centroid per loop, plane coordinates.
    pub loop_centroids: Vec<[f64; 2]>,
    /// Σ loop_areas, m².
    pub total_area: f64,
}

impl CrossSection {
    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    /// World-space centroid of loop `i`.
    pub fn loop_centroid_world(&self, i: usize) -> Point3<f64> {
        self.plane.unproject(self.loop_centroids[i])
    }

    /// Loop indices sorted by descending signed area.
    pub fn loops_by_area_desc(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.loops.len()).collect();
        idx.sort_by(|&a, &b| {
            self.loop_areas[b]
                .partial_cmp(&self.loop_areas[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plane_basis_is_right_handed() {
        for n in [Vector3::x(), Vector3::y(), Vector3::z(), Vector3::new(0.3, -0.5, 0.81)] {
            let plane = Plane::new(Point3::origin(), n).unwrap();
            let (u, v) = plane.basis();
            assert_relative_eq!(u.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(u.dot(&v), 0.0, epsilon = 1e-12);
            assert_relative_eq!(
                u.cross(&v).dot(&plane.normal),
                1.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn project_unproject_roundtrip() {
        let plane = Plane::new(Point3::new(1.0, 2.0, 3.0), Vector3::new(0.2, 0.5, -1.0)).unwrap();
        let p = Point3::new(0.7, -0.3, 2.9);
        let on_plane = p - plane.normal.into_inner() * plane.signed_distance(&p);
        let back = plane.unproject(plane.project(&on_plane));
        assert_relative_eq!((back - on_plane).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mirror_preserves_orientation() {
        let cube = crate::shapes::cube(1.0);
        let mirrored = cube.mirrored(Point3::origin(), Unit::new_normalize(Vector3::x()));
        assert_relative_eq!(mirrored.signed_volume(), cube.signed_volume(), epsilon = 1e-12);
    }
}
