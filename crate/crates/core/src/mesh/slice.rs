//! Planar cross-sections: closed intersection loops, areas, centroids, and
//! swept area profiles.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use super::poly2d;
use super::topology::edge_key;
use super::{CrossSection, Plane, TriangleMesh};

/// Signed vertex distances to the plane; exact zeros are nudged to a tiny
/// positive value so every vertex has a strict side and shared edges
/// classify identically across triangles.
pub(crate) fn vertex_distances(mesh: &TriangleMesh, plane: &Plane) -> Vec<f64> {
    mesh.vertices
        .iter()
        .map(|v| {
            let d = plane.signed_distance(v);
            if d == 0.0 {
                1e-300
            } else {
                d
            }
        })
        .collect()
}

pub(crate) fn edge_crossing_point(
    mesh: &TriangleMesh,
    d: &[f64],
    a: u32,
    b: u32,
) -> Point3<f64> {
    let (lo, hi) = edge_key(a, b);
    let (da, db) = (d[lo as usize], d[hi as usize]);
    let t = da / (da - db);
    let va = mesh.vertices[lo as usize];
    let vb = mesh.vertices[hi as usize];
    va + (vb - va) * t
}

/// Intersection loops as chains of (crossing edge, point). Loops are
/// oriented so that, viewed from the +normal side, solid material lies to
/// the left: outer material boundaries wind counter-clockwise.
pub(crate) fn section_loops(
    mesh: &TriangleMesh,
    _plane: &Plane,
    d: &[f64],
) -> Vec<Vec<((u32, u32), Point3<f64>)>> {
    // Each crossing triangle contributes one directed segment between its
    // two crossing edges; on a watertight mesh these chain into cycles.
    let mut successor: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for t in &mesh.triangles {
        let pos = [d[t[0] as usize] > 0.0, d[t[1] as usize] > 0.0, d[t[2] as usize] > 0.0];
        if pos == [true, true, true] || pos == [false, false, false] {
            continue;
        }
        // Index of the lone vertex whose side differs from the other two.
        let lone = if pos[0] == pos[1] {
            2
        } else if pos[0] == pos[2] {
            1
        } else {
            0
        };
        let l = t[lone];
        let p = t[(lone + 1) % 3];
        let q = t[(lone + 2) % 3];
        let e_lp = edge_key(l, p);
        let e_lq = edge_key(l, q);
        // Lone vertex below the plane: walk q-side edge → p-side edge;
        // above: the reverse. This realizes tangent = normal × face normal.
        if pos[lone] {
            successor.insert(e_lp, e_lq);
        } else {
            successor.insert(e_lq, e_lp);
        }
    }

    let mut keys: Vec<(u32, u32)> = successor.keys().copied().collect();
    keys.sort_unstable();
    let mut visited: std::collections::HashSet<(u32, u32)> = Default::default();
    let mut loops = Vec::new();
    for start in keys {
        if visited.contains(&start) {
            continue;
        }
        let mut lp = Vec::new();
        let mut cur = start;
        loop {
            visited.insert(cur);
            lp.push((cur, edge_crossing_point(mesh, d, cur.0, cur.1)));
            match successor.get(&cur) {
                Some(&next) if next == start => break,
                Some(&next) if !visited.contains(&next) => cur = next,
                _ => break, // broken chain on non-watertight input
            }
        }
        if lp.len() >= 3 {
            loops.push(lp);
        }
    }
    loops
}

/// Cross-section of a watertight mesh with a plane. An empty section (plane
/// misses the mesh) is a valid result.
pub fn cross_section(mesh: &TriangleMesh, plane: &Plane) -> CrossSection {
    let d = vertex_distances(mesh, plane);
    let loops3d = section_loops(mesh, plane, &d);

    let mut loops = Vec::with_capacity(loops3d.len());
    let mut loop_areas = Vec::with_capacity(loops3d.len());
    let mut loop_centroids = Vec::with_capacity(loops3d.len());
    let mut total_area = 0.0;
    for lp in &loops3d {
        let pts2d: Vec<[f64; 2]> = lp.iter().map(|(_, p)| plane.project(p)).collect();
        let area = poly2d::polygon_area(&pts2d);
        if area.abs() < 1e-14 {
            continue; // tangential sliver
        }
        total_area += area;
        loop_areas.push(area);
        loop_centroids.push(poly2d::polygon_centroid(&pts2d));
        loops.push(pts2d);
    }
    CrossSection { plane: *plane, loops, loop_areas, loop_centroids, total_area }
}

/// Sweeps cross-sections along `axis` from `start` to `stop` (inclusive)
/// in increments of `step`. With `start == stop` a single slice is taken.
pub fn area_profile(
    mesh: &TriangleMesh,
    axis: Vector3<f64>,
    start: f64,
    stop: f64,
    step: f64,
) -> Vec<(f64, CrossSection)> {
    assert!(step > 0.0, "profile step must be positive");
    assert!(start <= stop, "profile start must not exceed stop");
    let axis = axis.normalize();
    let mut out = Vec::with_capacity(((stop - start) / step) as usize + 2);
    let mut k = 0usize;
    loop {
        let coord = start + k as f64 * step;
        if coord > stop + step * 1e-9 {
            break;
        }
        let plane = Plane {
            point: Point3::from(axis * coord),
            normal: nalgebra::Unit::new_normalize(axis),
        };
        out.push((coord, cross_section(mesh, &plane)));
        if start == stop {
            break;
        }
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{cube, cuboid, cylinder, dumbbell};
    use approx::assert_relative_eq;

    #[test]
    fn cube_midplane_is_unit_square() {
        let m = cube(1.0).translated(Vector3::new(0.5, 0.5, 0.5));
        let cs = cross_section(&m, &Plane::axis_aligned(2, 0.5));
        assert_eq!(cs.loops.len(), 1);
        assert_relative_eq!(cs.total_area, 1.0, epsilon = 1e-12);
        assert_relative_eq!(cs.loop_areas[0], 1.0, epsilon = 1e-12);
        let c = cs.loop_centroid_world(0);
        assert_relative_eq!(c.x, 0.5, epsilon = 1e-12);
        assert_relative_eq!(c.y, 0.5, epsilon = 1e-12);
        assert_relative_eq!(c.z, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cylinder_midplane_area_matches_polygon() {
        let n = 48;
        let m = cylinder(0.02, 0.0, 0.1, n);
        let cs = cross_section(&m, &Plane::axis_aligned(2, 0.05));
        assert_eq!(cs.loops.len(), 1);
        let exact_polygon =
            0.5 * n as f64 * 0.02 * 0.02 * (2.0 * std::f64::consts::PI / n as f64).sin();
        assert_relative_eq!(cs.total_area, exact_polygon, max_relative = 1e-10);
        // Tessellated disk is within 1% of the true circle at n = 48.
        let disk = std::f64::consts::PI * 0.0004;
        assert!((cs.total_area - disk).abs() / disk < 0.01);
    }

    #[test]
    fn two_cylinders_give_two_loops() {
        let mut m = cylinder(0.02, 0.0, 0.1, 32);
        let other = cylinder(0.02, 0.0, 0.1, 32).translated(Vector3::new(0.1, 0.0, 0.0));
        m.append(&other);
        let cs = cross_section(&m, &Plane::axis_aligned(2, 0.05));
        assert_eq!(cs.loops.len(), 2);
        assert_eq!(cs.loop_centroids.len(), 2);
        let mut xs: Vec<f64> =
            (0..2).map(|i| cs.loop_centroid_world(i).x).collect();
        xs.sort_by(f64::total_cmp);
        assert_relative_eq!(xs[0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(xs[1], 0.1, epsilon = 1e-9);
    }

    #[test]
    fn missing_plane_gives_empty_section() {
        let m = cube(1.0);
        let cs = cross_section(&m, &Plane::axis_aligned(2, 5.0));
        assert!(cs.is_empty());
        assert_eq!(cs.total_area, 0.0);
    }

    #[test]
    fn hollow_section_has_negative_hole_loop() {
        // Outer box with an inner inverted box = a solid with a cavity.
        let mut outer = cube(1.0);
        let mut inner = cube(0.4);
        for t in &mut inner.triangles {
            t.swap(1, 2);
        }
        outer.append(&inner);
        let cs = cross_section(&outer, &Plane::axis_aligned(2, 0.0));
        assert_eq!(cs.loops.len(), 2);
        let mut areas = cs.loop_areas.clone();
        areas.sort_by(f64::total_cmp);
        assert_relative_eq!(areas[0], -0.16, epsilon = 1e-12);
        assert_relative_eq!(areas[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(cs.total_area, 0.84, epsilon = 1e-12);
    }

    #[test]
    fn cube_profile_is_constant_inside() {
        let m = cube(1.0).translated(Vector3::new(0.5, 0.5, 0.5));
        let profile = area_profile(&m, Vector3::z(), 0.1, 0.9, 0.1);
        assert_eq!(profile.len(), 9);
        for (_, cs) in &profile {
            assert_relative_eq!(cs.total_area, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_profile_range_gives_single_slice() {
        let m = cube(1.0);
        let profile = area_profile(&m, Vector3::z(), 0.0, 0.0, 0.01);
        assert_eq!(profile.len(), 1);
    }

    #[test]
    fn dumbbell_profile_minimum_sits_at_the_neck() {
        // Spheres r = 0.05 joined by an r = 0.01 neck centered at z = 0.
        let (sphere_r, neck_r, neck_half) = (0.05, 0.01, 0.05);
        let m = dumbbell(sphere_r, neck_r, neck_half, 16);
        let step = 0.002;
        let profile = area_profile(&m, Vector3::z(), -0.14, 0.14, step);
        let (min_coord, min_area) = profile
            .iter()
            .filter(|(_, cs)| !cs.is_empty())
            .min_by(|a, b| a.1.total_area.total_cmp(&b.1.total_area))
            .map(|(c, cs)| (*c, cs.total_area))
            .unwrap();
        // Independent oracle: the analytic radius profile r(z). Its minimum
        // is attained exactly on the neck span.
        let c = neck_half + sphere_r;
        let junction = c - (sphere_r * sphere_r - neck_r * neck_r).sqrt();
        assert!(
            min_coord.abs() <= junction + step + 1e-12,
            "minimum at {min_coord}, analytic neck spans ±{junction}"
        );
        // Tessellated polygon area vs the analytic disk, within 2%.
        let disk = std::f64::consts::PI * neck_r * neck_r;
        assert!((min_area - disk).abs() / disk < 0.02, "neck area {min_area} vs {disk}");
        // Outside the neck span the analytic profile is strictly larger.
        for (z, cs) in &profile {
            if !cs.is_empty() && z.abs() > junction + step {
                assert!(cs.total_area > min_area * 1.5, "flank at {z} not above the neck");
            }
        }
    }

    #[test]
    fn adjacent_slices_change_area_continuously_on_convex_bodies() {
        let m = crate::shapes::icosphere(0.1, 3);
        let step = 0.005;
        let profile = area_profile(&m, Vector3::z(), -0.08, 0.08, step);
        for w in profile.windows(2) {
            let a0 = w[0].1.total_area;
            let a1 = w[1].1.total_area;
            // |dA/dz| ≤ 2πr for a sphere; allow generous slack for tessellation.
            assert!(
                (a1 - a0).abs() < 4.0 * std::f64::consts::PI * 0.1 * step,
                "area jump {} at {}",
                (a1 - a0).abs(),
                w[1].0
            );
        }
        let box_profile =
            area_profile(&cuboid(Vector3::new(0.05, 0.04, 0.03)), Vector3::z(), -0.02, 0.02, 0.005);
        for (_, cs) in &box_profile {
            assert_relative_eq!(cs.total_area, 0.1 * 0.08, epsilon = 1e-12);
        }
    }
}
