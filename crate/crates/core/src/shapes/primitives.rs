//! Watertight primitive generators.

use nalgebra::{Point3, Vector3};

use crate::mesh::poly2d;
use crate::mesh::TriangleMesh;

/// Axis-aligned cuboid with the given half-extents, centered at the origin.
pub fn cuboid(half: Vector3<f64>) -> TriangleMesh {
    let (hx, hy, hz) = (half.x, half.y, half.z);
    let vertices = vec![
        Point3::new(-hx, -hy, -hz),
        Point3::new(hx, -hy, -hz),
        Point3::new(hx, hy, -hz),
        Point3::new(-hx, hy, -hz),
        Point3::new(-hx, -hy, hz),
        Point3::new(hx, -hy, hz),
        Point3::new(hx, hy, hz),
        Point3::new(-hx, hy, hz),
    ];
    let triangles = vec![
        // bottom (z-)
        [0, 2, 1],
        [0, 3, 2],
        // top (z+)
        [4, 5, 6],
        [4, 6, 7],
        // front (y-)
        [0, 1, 5],
        [0, 5, 4],
        // back (y+)
        [3, 6, 2],
        [3, 7, 6],
        // left (x-)
        [0, 4, 7],
        [0, 7, 3],
        // right (x+)
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriangleMesh::new(vertices, triangles)
}

/// Cube with the given edge length, centered at the origin.
pub fn cube(edge: f64) -> TriangleMesh {
    cuboid(Vector3::repeat(edge / 2.0))
}

/// Surface of revolution around the z axis.
///
/// `profile` is a list of (z, radius) stations, ordered by z; radii must be
/// positive except that the first/last station may be 0 to close with an
/// apex. Stations with positive radius get capped with a triangle fan at
/// the ends. `segments` is the angular tessellation.
pub fn lathe(profile: &[(f64, f64)], segments: usize) -> TriangleMesh {
    assert!(profile.len() >= 2, "lathe needs at least two stations");
    assert!(segments >= 3);
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    // Ring vertex ids per station; apex stations produce a single vertex.
    let mut rings: Vec<Vec<u32>> = Vec::with_capacity(profile.len());
    for &(z, r) in profile {
        if r <= 0.0 {
            vertices.push(Point3::new(0.0, 0.0, z));
            rings.push(vec![(vertices.len() - 1) as u32]);
        } else {
            let mut ring = Vec::with_capacity(segments);
            for s in 0..segments {
                let a = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
                vertices.push(Point3::new(r * a.cos(), r * a.sin(), z));
                ring.push((vertices.len() - 1) as u32);
            }
            rings.push(ring);
        }
    }

    // Walls between consecutive stations (outward normals).
    for w in 0..profile.len() - 1 {
        let (lo, hi) = (&rings[w], &rings[w + 1]);
        match (lo.len(), hi.len()) {
            (1, 1) => {}
            (1, _) => {
                let apex = lo[0];
                for s in 0..segments {
                    let a = hi[s];
                    let b = hi[(s + 1) % segments];
                    triangles.push([apex, b, a]);
                }
            }
            (_, 1) => {
                let apex = hi[0];
                for s in 0..segments {
                    let a = lo[s];
                    let b = lo[(s + 1) % segments];
                    triangles.push([apex, a, b]);
                }
            }
            _ => {
                for s in 0..segments {
                    let a0 = lo[s];
                    let a1 = lo[(s + 1) % segments];
                    let b0 = hi[s];
                    let b1 = hi[(s + 1) % segments];
                    triangles.push([a0, a1, b1]);
                    triangles.push([a0, b1, b0]);
                }
            }
        }
    }

    // Flat caps at open ends.
    if rings[0].len() > 1 {
        let ring = &rings[0];
        for s in 1..segments - 1 {
            triangles.push([ring[0], ring[s + 1], ring[s]]); // faces -z
        }
    }
    if rings[profile.len() - 1].len() > 1 {
        let ring = &rings[profile.len() - 1];
        for s in 1..segments - 1 {
            triangles.push([ring[0], ring[s], ring[s + 1]]); // faces +z
        }
    }

    TriangleMesh::new(vertices, triangles)
}

/// Closed cylinder along z from `z0` to `z1`.
pub fn cylinder(radius: f64, z0: f64, z1: f64, segments: usize) -> TriangleMesh {
    lathe(&[(z0, radius), (z1, radius)], segments)
}

/// Two spheres joined by a thin neck, symmetric about the origin along z.
/// Sphere centers sit at ±(neck_half_len + sphere_r).
pub fn dumbbell(sphere_r: f64, neck_r: f64, neck_half_len: f64, rings: usize) -> TriangleMesh {
    let c = neck_half_len + sphere_r;
    let mut profile: Vec<(f64, f64)> = Vec::new();
    // Lower sphere from its south pole up to where it necks in.
    profile.push((-c - sphere_r, 0.0));
    let steps = rings.max(6);
    let phi_neck = (neck_r / sphere_r).acos();
    for k in 1..=steps {
        let phi = -std::f64::consts::FRAC_PI_2
            + (std::f64::consts::FRAC_PI_2 + phi_neck) * k as f64 / steps as f64;
        profile.push((-c + sphere_r * phi.sin(), sphere_r * phi.cos()));
    }
    // Mirror for the upper sphere.
    let lower: Vec<(f64, f64)> = profile.clone();
    for &(z, r) in lower.iter().rev() {
        profile.push((-z, r));
    }
    lathe(&profile, 4 * rings)
}

/// Extrudes a simple CCW polygon along z into a prism with ear-clipped caps.
pub fn extrude_polygon(polygon: &[[f64; 2]], z0: f64, z1: f64) -> TriangleMesh {
    assert!(polygon.len() >= 3 && z1 > z0);
    let n = polygon.len();
    let ccw = poly2d::polygon_area(polygon) > 0.0;
    let mut vertices = Vec::with_capacity(2 * n);
    for &[x, y] in polygon {
        vertices.push(Point3::new(x, y, z0));
    }
    for &[x, y] in polygon {
        vertices.push(Point3::new(x, y, z1));
    }
    let mut triangles = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let (a0, b0) = (i as u32, j as u32);
        let (a1, b1) = ((i + n) as u32, (j + n) as u32);
        if ccw {
            triangles.push([a0, b0, b1]);
            triangles.push([a0, b1, a1]);
        } else {
            triangles.push([a0, b1, b0]);
            triangles.push([a0, a1, b1]);
        }
    }
    for t in poly2d::triangulate(polygon) {
        let [a, b, c] = [t[0] as u32, t[1] as u32, t[2] as u32];
        // Bottom cap faces -z, top cap faces +z. Triangulation preserves
        // the input winding, so CW input needs the opposite flips.
        if ccw {
            triangles.push([a, c, b]);
            triangles.push([a + n as u32, b + n as u32, c + n as u32]);
        } else {
            triangles.push([a, b, c]);
            triangles.push([a + n as u32, c + n as u32, b + n as u32]);
        }
    }
    TriangleMesh::new(vertices, triangles)
}

/// L-shaped prism: a `size × size` square with one `size/2` quadrant
/// removed, extruded to `height`.
pub fn l_prism(size: f64, height: f64) -> TriangleMesh {
    let s = size;
    let h = s / 2.0;
    let poly = [
        [0.0, 0.0],
        [s, 0.0],
        [s, h],
        [h, h],
        [h, s],
        [0.0, s],
    ];
    extrude_polygon(&poly, 0.0, height)
}

/// Icosphere: subdivided icosahedron scaled to `radius`, centered at the
/// origin.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, phi, 0.0),
        Vector3::new(1.0, phi, 0.0),
        Vector3::new(-1.0, -phi, 0.0),
        Vector3::new(1.0, -phi, 0.0),
        Vector3::new(0.0, -1.0, phi),
        Vector3::new(0.0, 1.0, phi),
        Vector3::new(0.0, -1.0, -phi),
        Vector3::new(0.0, 1.0, -phi),
        Vector3::new(phi, 0.0, -1.0),
        Vector3::new(phi, 0.0, 1.0),
        Vector3::new(-phi, 0.0, -1.0),
        Vector3::new(-phi, 0.0, 1.0),
    ]
    .into_iter()
    .map(|v| v.normalize())
    .collect();
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: std::collections::HashMap<(u32, u32), u32> =
            std::collections::HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Vector3<f64>>| -> u32 {
            let key = if a < b { (a, b) } else { (b, a) };
            *midpoints.entry(key).or_insert_with(|| {
                let m = (vertices[a as usize] + vertices[b as usize]).normalize();
                vertices.push(m);
                (vertices.len() - 1) as u32
            })
        };
        for t in &triangles {
            let ab = midpoint(t[0], t[1], &mut vertices);
            let bc = midpoint(t[1], t[2], &mut vertices);
            let ca = midpoint(t[2], t[0], &mut vertices);
            next.push([t[0], ab, ca]);
            next.push([t[1], bc, ab]);
            next.push([t[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }

    let vertices = vertices.into_iter().map(|v| Point3::from(v * radius)).collect();
    TriangleMesh::new(vertices, triangles)
}
