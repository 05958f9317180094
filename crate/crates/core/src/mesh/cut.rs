//! Plane cuts that keep one half-space and cap the cut faces so the result
//! stays watertight.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::poly2d;
use super::slice::{edge_crossing_point, section_loops, vertex_distances};
use super::topology::edge_key;
use super::{Plane, TriangleMesh};
use crate::error::{Error, Result};

/// Which half-space survives the cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeepSide {
    Positive,
    Negative,
}

/// Cuts a watertight mesh by a plane, keeping the requested side and
/// capping the openings with triangulated section polygons. The two halves
/// of a cut conserve volume to ~1e-6 relative.
pub fn plane_cut(mesh: &TriangleMesh, plane: &Plane, keep: KeepSide) -> Result<TriangleMesh> {
    let d = vertex_distances(mesh, plane);
    let keep_vertex = |i: u32| -> bool {
        let positive = d[i as usize] > 0.0;
        match keep {
            KeepSide::Positive => positive,
            KeepSide::Negative => !positive,
        }
    };

    let mut out_vertices: Vec<nalgebra::Point3<f64>> = Vec::new();
    let mut out_triangles: Vec<[u32; 3]> = Vec::new();
    // Old vertex index -> new index, for kept vertices.
    let mut vmap: HashMap<u32, u32> = HashMap::new();
    // Crossing edge -> new vertex index on the cut plane.
    let mut emap: HashMap<(u32, u32), u32> = HashMap::new();

    let keep_old = |i: u32,
                        out_vertices: &mut Vec<nalgebra::Point3<f64>>,
                        vmap: &mut HashMap<u32, u32>| {
        *vmap.entry(i).or_insert_with(|| {
            out_vertices.push(mesh.vertices[i as usize]);
            (out_vertices.len() - 1) as u32
        })
    };
    let cut_vertex = |a: u32,
                          b: u32,
                          out_vertices: &mut Vec<nalgebra::Point3<f64>>,
                          emap: &mut HashMap<(u32, u32), u32>| {
        *emap.entry(edge_key(a, b)).or_insert_with(|| {
            out_vertices.push(edge_crossing_point(mesh, &d, a, b));
            (out_vertices.len() - 1) as u32
        })
    };

    for t in &mesh.triangles {
        let kept = [keep_vertex(t[0]), keep_vertex(t[1]), keep_vertex(t[2])];
        let kept_count = kept.iter().filter(|&&k| k).count();
        match kept_count {
            0 => {}
            3 => {
                let tri = [
                    keep_old(t[0], &mut out_vertices, &mut vmap),
                    keep_old(t[1], &mut out_vertices, &mut vmap),
                    keep_old(t[2], &mut out_vertices, &mut vmap),
                ];
                out_triangles.push(tri);
            }
            1 => {
                // Rotate so the kept vertex is first; winding is preserved.
                let k = kept.iter().position(|&x| x).unwrap();
                let a = t[k];
                let b = t[(k + 1) % 3];
                let c = t[(k + 2) % 3];
                let na = keep_old(a, &mut out_vertices, &mut vmap);
                let nab = cut_vertex(a, b, &mut out_vertices, &mut emap);
                let nca = cut_vertex(c, a, &mut out_vertices, &mut emap);
                out_triangles.push([na, nab, nca]);
            }
            2 => {
                // Rotate so the discarded vertex is last.
                let k = kept.iter().position(|&x| !x).unwrap();
                let c = t[k]; // discarded
                let a = t[(k + 1) % 3];
                let b = t[(k + 2) % 3];
                let na = keep_old(a, &mut out_vertices, &mut vmap);
                let nb = keep_old(b, &mut out_vertices, &mut vmap);
                let nbc = cut_vertex(b, c, &mut out_vertices, &mut emap);
                let nca = cut_vertex(c, a, &mut out_vertices, &mut emap);
                out_triangles.push([na, nb, nbc]);
                out_triangles.push([na, nbc, nca]);
            }
            _ => unreachable!(),
        }
    }

    if out_triangles.is_empty() {
        return Err(Error::EmptyCut(format!(
            "no geometry on the {keep:?} side of the plane"
        )));
    }

    // Cap the openings. Section loops are shared with the cut via edge
    // keys, so cap boundaries weld exactly onto the cut rims.
    for lp in section_loops(mesh, plane, &d) {
        let mut ring: Vec<u32> = Vec::with_capacity(lp.len());
        let mut ring2d: Vec<[f64; 2]> = Vec::with_capacity(lp.len());
        let mut complete = true;
        for (ekey, point) in &lp {
            match emap.get(ekey) {
                Some(&idx) => {
                    ring.push(idx);
                    ring2d.push(plane.project(point));
                }
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete || ring.len() < 3 {
            continue; // degenerate sliver loop that produced no cut edge
        }
        for tri in poly2d::triangulate(&ring2d) {
            let (a, b, c) = (ring[tri[0]], ring[tri[1]], ring[tri[2]]);
            // Loops wind CCW (from +normal) around material. The kept
            // positive side needs caps facing -normal, so flip there.
            match keep {
                KeepSide::Positive => out_triangles.push([a, c, b]),
                KeepSide::Negative => out_triangles.push([a, b, c]),
            }
        }
    }

    Ok(TriangleMesh {
        vertices: out_vertices,
        triangles: out_triangles,
        units_scale: mesh.units_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::is_watertight;
    use crate::shapes::{cube, icosphere};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    #[test]
    fn half_cube_has_half_volume_and_is_watertight() {
        let m = cube(1.0).translated(Vector3::new(0.5, 0.5, 0.5));
        let plane = Plane::axis_aligned(2, 0.5);
        let top = plane_cut(&m, &plane, KeepSide::Positive).unwrap();
        assert!(is_watertight(&top));
        assert_relative_eq!(top.signed_volume(), 0.5, max_relative = 1e-12);
        let bottom = plane_cut(&m, &plane, KeepSide::Negative).unwrap();
        assert!(is_watertight(&bottom));
        assert_relative_eq!(bottom.signed_volume(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn sphere_halves_conserve_volume() {
        let m = icosphere(0.1, 3);
        let plane = Plane::new(
            nalgebra::Point3::origin(),
            Vector3::new(0.3, -0.7, 0.5),
        )
        .unwrap();
        let a = plane_cut(&m, &plane, KeepSide::Positive).unwrap();
        let b = plane_cut(&m, &plane, KeepSide::Negative).unwrap();
        assert!(is_watertight(&a));
        assert!(is_watertight(&b));
        let (va, vb, v) = (a.signed_volume(), b.signed_volume(), m.signed_volume());
        assert_relative_eq!(va + vb, v, max_relative = 1e-6);
        // Cut through the center: equal halves.
        assert_relative_eq!(va, vb, max_relative = 1e-6);
    }

    #[test]
    fn tangent_cut_returns_nearly_everything() {
        let m = icosphere(0.05, 3);
        let (min, _) = m.bounding_box().unwrap();
        let plane = Plane::axis_aligned(2, min.z);
        let kept = plane_cut(&m, &plane, KeepSide::Positive).unwrap();
        let discarded = m.signed_volume() - kept.signed_volume();
        assert!(discarded.abs() < 1e-9, "discarded volume {discarded}");
        let err = plane_cut(&m, &plane, KeepSide::Negative).unwrap_err();
        assert!(matches!(err, Error::EmptyCut(_)));
    }

    #[test]
    fn oblique_cube_cut_conserves_volume() {
        let m = cube(0.3);
        let plane = Plane::new(
            nalgebra::Point3::new(0.02, -0.03, 0.01),
            Vector3::new(1.0, 2.0, -0.4),
        )
        .unwrap();
        let a = plane_cut(&m, &plane, KeepSide::Positive).unwrap();
        let b = plane_cut(&m, &plane, KeepSide::Negative).unwrap();
        assert!(is_watertight(&a) && is_watertight(&b));
        assert_relative_eq!(
            a.signed_volume() + b.signed_volume(),
            m.signed_volume(),
            max_relative = 1e-9
        );
    }
}
