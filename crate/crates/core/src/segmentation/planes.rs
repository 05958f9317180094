//! Separation-plane search: march cross-sections outward from the origin
//! along ±y and take the first strict local area minimum; its coordinate is
//! mirrored to the other side.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::SegmentationConfig;
use crate::error::{Error, Result};
use crate::mesh::{area_profile, Plane, TriangleMesh};

/// Scan record kept for reporting and the heat-map plot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceScan {
    pub step: f64,
    /// Signed slice coordinates, ascending.
    pub ys: Vec<f64>,
    pub areas: Vec<f64>,
    pub loop_counts: Vec<usize>,
    /// Outward slice index of the chosen minimum per direction.
    pub chosen_plus: Option<usize>,
    pub chosen_minus: Option<usize>,
    /// +1 or -1: which direction supplied the mirrored coordinate.
    pub winner: i8,
    /// |y| of the separation planes.
    pub plane_y: f64,
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-30)
}

/// First strict local minimum of `areas` (indexed outward from the origin,
/// index 0 = the origin slice). Plateaus bounded by strictly larger values
/// on both sides count, taking the plateau point nearest the origin. Empty
/// slices (zero area) never qualify and end the usable range.
fn first_local_min(areas: &[f64]) -> Option<usize> {
    let n = areas.len();
    let mut k = 1;
    while k + 1 < n {
        let a = areas[k];
        if a <= 0.0 {
            return None; // marched past the mesh
        }
        if a < areas[k - 1] && !nearly_equal(a, areas[k - 1]) {
            // Strict drop into k; find the plateau end.
            let mut j = k;
            while j + 1 < n && nearly_equal(areas[j + 1], a) {
                j += 1;
            }
            if j + 1 < n && areas[j + 1] > a && !nearly_equal(areas[j + 1], a) && areas[j + 1] > 0.0
            {
                return Some(k);
            }
            k = j + 1;
        } else {
            k += 1;
        }
    }
    None
}

/// Finds the two separation planes of a canonical, watertight mesh.
///
/// Returns the front (+y) and rear (-y) planes, both with +y normals, plus
/// the scan record. Fails when neither marching direction shows a local
/// area minimum, which rejects legless prisms.
pub fn find_separation_planes(
    mesh: &TriangleMesh,
    config: &SegmentationConfig,
) -> Result<(Plane, Plane, SliceScan)> {
    let (min, max) = mesh
        .bounding_box()
        .ok_or_else(|| Error::DegenerateMesh("empty mesh".into()))?;
    let step = config.slice_step;
    let profile = area_profile(mesh, Vector3::y(), min.y - step, max.y + step, step);

    let ys: Vec<f64> = profile.iter().map(|(y, _)| *y).collect();
    let areas: Vec<f64> = profile.iter().map(|(_, cs)| cs.total_area).collect();
    let loop_counts: Vec<usize> = profile.iter().map(|(_, cs)| cs.loops.len()).collect();

    // Index of the slice at (or just below) y = 0, the marching origin.
    let origin_idx = ys
        .iter()
        .position(|&y| y + step * 0.5 >= 0.0)
        .unwrap_or(0);

    let outward_plus: Vec<f64> = areas[origin_idx..].to_vec();
    let outward_minus: Vec<f64> = areas[..=origin_idx].iter().rev().copied().collect();

    let plus = first_local_min(&outward_plus);
    let minus = first_local_min(&outward_minus);

    let (winner, chosen_outward) = match (plus, minus) {
        (Some(p), Some(m)) => {
            if p <= m {
                (1i8, p)
            } else {
                (-1i8, m)
            }
        }
        (Some(p), None) => (1, p),
        (None, Some(m)) => (-1, m),
        (None, None) => {
            return Err(Error::Segmentation(
                "no local cross-section minimum along either marching direction".into(),
            ))
        }
    };
    let plane_y = if winner == 1 {
        ys[origin_idx + chosen_outward]
    } else {
        -ys[origin_idx - chosen_outward]
    }
    .abs();

    let scan = SliceScan {
        step,
        ys,
        areas,
        loop_counts,
        chosen_plus: plus,
        chosen_minus: minus,
        winner,
        plane_y,
    };
    let front = Plane::axis_aligned(1, plane_y);
    let rear = Plane::axis_aligned(1, -plane_y);
    Ok((front, rear, scan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::cuboid;

    #[test]
    fn prism_has_no_separation_planes() {
        let m = cuboid(Vector3::new(0.06, 0.15, 0.04)).translated(Vector3::new(0.0, 0.0, 0.04));
        let err = find_separation_planes(&m, &SegmentationConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Segmentation(_)));
    }

    #[test]
    fn first_local_min_strict_case() {
        assert_eq!(first_local_min(&[5.0, 4.0, 3.0, 4.0, 5.0]), Some(2));
        assert_eq!(first_local_min(&[5.0, 5.0, 5.0, 5.0]), None);
        // Falling to the edge is not a minimum.
        assert_eq!(first_local_min(&[5.0, 4.0, 3.0, 2.0]), None);
    }

    #[test]
    fn first_local_min_takes_plateau_point_nearest_origin() {
        assert_eq!(first_local_min(&[5.0, 3.0, 3.0, 3.0, 4.0]), Some(1));
        // Plateau that later falls further is skipped.
        assert_eq!(first_local_min(&[5.0, 3.0, 3.0, 2.0, 4.0, 9.0]), Some(3));
    }

    #[test]
    fn zero_area_gap_ends_the_march() {
        assert_eq!(first_local_min(&[5.0, 4.0, 0.0, 4.0, 5.0]), None);
    }
}
