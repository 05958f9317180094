//! Minimal signed-distance-field combinators for building organic solids.
//! Negative inside, positive outside.

use nalgebra::{Point3, Vector3};

/// Signed distance solid.
#[derive(Debug, Clone)]
pub enum Sdf {
    Sphere {
        center: Point3<f64>,
        radius: f64,
    },
    /// Approximate ellipsoid distance (exact sign, approximate magnitude).
    Ellipsoid {
        center: Point3<f64>,
        radii: Vector3<f64>,
    },
    Capsule {
        a: Point3<f64>,
        b: Point3<f64>,
        radius: f64,
    },
    /// Capped cone with spherical ends of radius `r_a` at `a`, `r_b` at `b`.
    RoundCone {
        a: Point3<f64>,
        b: Point3<f64>,
        r_a: f64,
        r_b: f64,
    },
    Box {
        center: Point3<f64>,
        half: Vector3<f64>,
    },
    Union(Vec<Sdf>),
    /// Polynomial smooth union with blend radius `k`.
    SmoothUnion {
        k: f64,
        items: Vec<Sdf>,
    },
}

fn smooth_min(a: f64, b: f64, k: f64) -> f64 {
    let h = (0.5 + 0.5 * (b - a) / k).clamp(0.0, 1.0);
    b * (1.0 - h) + a * h - k * h * (1.0 - h)
}

impl Sdf {
    pub fn distance(&self, p: &Point3<f64>) -> f64 {
        match self {
            Sdf::Sphere { center, radius } => (p - center).norm() - radius,
            Sdf::Ellipsoid { center, radii } => {
                let q = p - center;
                let k0 = Vector3::new(q.x / radii.x, q.y / radii.y, q.z / radii.z).norm();
                let k1 = Vector3::new(
                    q.x / (radii.x * radii.x),
                    q.y / (radii.y * radii.y),
                    q.z / (radii.z * radii.z),
                )
                .norm();
                if k1 == 0.0 {
                    -radii.min()
                } else {
                    k0 * (k0 - 1.0) / k1
                }
            }
            Sdf::Capsule { a, b, radius } => {
                let ab = b - a;
                let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
                ((p - a) - ab * t).norm() - radius
            }
            Sdf::RoundCone { a, b, r_a, r_b } => {
                let ba = b - a;
                let l2 = ba.norm_squared();
                let rr = r_a - r_b;
                let a2 = l2 - rr * rr;
                let il2 = 1.0 / l2;
                let pa = p - a;
                let y = pa.dot(&ba);
                let z = y - l2;
                let x2 = (pa * l2 - ba * y).norm_squared();
                let y2 = y * y * l2;
                let z2 = z * z * l2;
                let k = rr.signum() * rr * rr * x2;
                if z.signum() * a2 * z2 > k {
                    (x2 + z2).sqrt() * il2 - r_b
                } else if y.signum() * a2 * y2 < k {
                    (x2 + y2).sqrt() * il2 - r_a
                } else {
                    ((x2 * a2 * il2).sqrt() + y * rr) * il2 - r_a
                }
            }
            Sdf::Box { center, half } => {
                let q = (p - center).abs() - half;
                let outside = Vector3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0));
                outside.norm() + q.max().min(0.0)
            }
            Sdf::Union(items) => items
                .iter()
                .map(|s| s.distance(p))
                .fold(f64::INFINITY, f64::min),
            Sdf::SmoothUnion { k, items } => {
                let mut it = items.iter();
                let mut d = match it.next() {
                    Some(s) => s.distance(p),
                    None => return f64::INFINITY,
                };
                for s in it {
                    d = smooth_min(d, s.distance(p), *k);
                }
                d
            }
        }
    }

    /// Loose bounding box (extended by blend radii).
    pub fn bounds(&self) -> (Point3<f64>, Point3<f64>) {
        match self {
            Sdf::Sphere { center, radius } => {
                (center - Vector3::repeat(*radius), center + Vector3::repeat(*radius))
            }
            Sdf::Ellipsoid { center, radii } => (center - radii, center + radii),
            Sdf::Capsule { a, b, radius } => {
                let r = Vector3::repeat(*radius);
                let min = Point3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)) - r;
                let max = Point3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)) + r;
                (min, max)
            }
            Sdf::RoundCone { a, b, r_a, r_b } => {
                let r = Vector3::repeat(r_a.max(*r_b));
                let min = Point3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)) - r;
                let max = Point3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)) + r;
                (min, max)
            }
            Sdf::Box { center, half } => (center - half, center + half),
            Sdf::Union(items) | Sdf::SmoothUnion { items, .. } => {
                let mut min = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
                let mut max = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
                for s in items {
                    let (lo, hi) = s.bounds();
                    for k in 0..3 {
                        min[k] = min[k].min(lo[k]);
                        max[k] = max[k].max(hi[k]);
                    }
                }
                if let Sdf::SmoothUnion { k, .. } = self {
                    let pad = Vector3::repeat(*k);
                    (min - pad, max + pad)
                } else {
                    (min, max)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_distance_signs() {
        let s = Sdf::Sphere { center: Point3::origin(), radius: 1.0 };
        assert!(s.distance(&Point3::new(0.5, 0.0, 0.0)) < 0.0);
        assert!(s.distance(&Point3::new(2.0, 0.0, 0.0)) > 0.0);
        assert!((s.distance(&Point3::new(1.0, 0.0, 0.0))).abs() < 1e-12);
    }

    #[test]
    fn smooth_union_contains_both() {
        let u = Sdf::SmoothUnion {
            k: 0.1,
            items: vec![
                Sdf::Sphere { center: Point3::new(-0.5, 0.0, 0.0), radius: 0.4 },
                Sdf::Sphere { center: Point3::new(0.5, 0.0, 0.0), radius: 0.4 },
            ],
        };
        assert!(u.distance(&Point3::new(-0.5, 0.0, 0.0)) < 0.0);
        assert!(u.distance(&Point3::new(0.5, 0.0, 0.0)) < 0.0);
        // Blending pulls the midpoint inward compared to a hard union.
        let hard = (-0.5f64 + 0.4).abs().min((0.5f64 - 0.4).abs());
        assert!(u.distance(&Point3::origin()) < hard);
    }
}
