//! Monte-Carlo bilateral symmetry score.

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Plane, TriangleMesh};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SymmetrySampling {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SymmetrySampling {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0 }
    }
}

/// Scores mirror symmetry about `plane` in [0, 1]:
/// `1 − vol(mesh Δ mirror(mesh)) / (2 · vol(mesh))`, estimated by point
/// sampling with a fixed seed, so the result is deterministic.
pub fn bilateral_symmetry_score(
    mesh: &TriangleMesh,
    plane: &Plane,
    sampling: SymmetrySampling,
) -> f64 {
    let Some((min, max)) = mesh.bounding_box() else {
        return 0.0;
    };
    // Sample over the union of the bbox and its mirror image so both the
    // solid and its reflection are covered.
    let corners = [
        Point3::new(min.x, min.y, min.z),
        Point3::new(max.x, min.y, min.z),
        Point3::new(min.x, max.y, min.z),
        Point3::new(max.x, max.y, min.z),
        Point3::new(min.x, min.y, max.z),
        Point3::new(max.x, min.y, max.z),
        Point3::new(min.x, max.y, max.z),
        Point3::new(max.x, max.y, max.z),
    ];
    let mut lo = min;
    let mut hi = max;
    for c in corners {
        let m = mirror_point(&c, plane);
        for k in 0..3 {
            lo[k] = lo[k].min(m[k]);
            hi[k] = hi[k].max(m[k]);
        }
    }

    let grid = RayGrid::build(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut inside = 0u64;
    let mut xor = 0u64;
    for _ in 0..sampling.samples {
        let p = Point3::new(
            rng.gen_range(lo.x..hi.x),
            rng.gen_range(lo.y..hi.y),
            rng.gen_range(lo.z..hi.z),
        );
        let a = grid.contains(mesh, &p);
        let b = grid.contains(mesh, &mirror_point(&p, plane));
        if a {
            inside += 1;
        }
        if a != b {
            xor += 1;
        }
    }
    if inside == 0 {
        return 0.0;
    }
    (1.0 - xor as f64 / (2.0 * inside as f64)).clamp(0.0, 1.0)
}

fn mirror_point(p: &Point3<f64>, plane: &Plane) -> Point3<f64> {
    p - plane.normal.into_inner() * (2.0 * plane.signed_distance(p))
}

/// Uniform xy grid binning triangles for vertical-ray parity queries.
pub(crate) struct RayGrid {
    lo: [f64; 2],
    cell: [f64; 2],
    nx: usize,
    ny: usize,
    bins: Vec<Vec<u32>>,
}

impl RayGrid {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let (min, max) = mesh.bounding_box().expect("non-empty mesh");
        let n = ((mesh.triangles.len() as f64).sqrt().ceil() as usize).clamp(8, 128);
        let (nx, ny) = (n, n);
        let span = [(max.x - min.x).max(1e-12), (max.y - min.y).max(1e-12)];
        let cell = [span[0] / nx as f64, span[1] / ny as f64];
        let mut bins = vec![Vec::new(); nx * ny];
        for (ti, _) in mesh.triangles.iter().enumerate() {
            let [a, b, c] = mesh.triangle_points(ti);
            let txmin = a.x.min(b.x).min(c.x);
            let txmax = a.x.max(b.x).max(c.x);
            let tymin = a.y.min(b.y).min(c.y);
            let tymax = a.y.max(b.y).max(c.y);
            let i0 = (((txmin - min.x) / cell[0]).floor() as isize).clamp(0, nx as isize - 1);
            let i1 = (((txmax - min.x) / cell[0]).floor() as isize).clamp(0, nx as isize - 1);
            let j0 = (((tymin - min.y) / cell[1]).floor() as isize).clamp(0, ny as isize - 1);
            let j1 = (((tymax - min.y) / cell[1]).floor() as isize).clamp(0, ny as isize - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    bins[i as usize * ny + j as usize].push(ti as u32);
                }
            }
        }
        Self { lo: [min.x, min.y], cell, nx, ny, bins }
    }

    /// Point-in-solid parity test casting a +z ray.
    pub fn contains(&self, mesh: &TriangleMesh, p: &Point3<f64>) -> bool {
        let i = ((p.x - self.lo[0]) / self.cell[0]).floor();
        let j = ((p.y - self.lo[1]) / self.cell[1]).floor();
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return false;
        }
        let mut crossings = 0u32;
        for &ti in &self.bins[i as usize * self.ny + j as usize] {
            let [a, b, c] = mesh.triangle_points(ti as usize);
            if ray_up_hits(p, &a, &b, &c) {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }
}

/// Does the vertical ray from `p` toward +z pierce triangle abc above `p`?
fn ray_up_hits(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> bool {
    // 2D barycentric membership in the xy projection.
    let v0 = Vector3::new(b.x - a.x, b.y - a.y, 0.0);
    let v1 = Vector3::new(c.x - a.x, c.y - a.y, 0.0);
    let v2 = Vector3::new(p.x - a.x, p.y - a.y, 0.0);
    let den = v0.x * v1.y - v1.x * v0.y;
    if den.abs() < 1e-30 {
        return false; // vertical triangle: measure-zero for random rays
    }
    let u = (v2.x * v1.y - v1.x * v2.y) / den;
    let v = (v0.x * v2.y - v2.x * v0.y) / den;
    if u < 0.0 || v < 0.0 || u + v > 1.0 {
        return false;
    }
    let z = a.z + u * (b.z - a.z) + v * (c.z - a.z);
    z > p.z
}
