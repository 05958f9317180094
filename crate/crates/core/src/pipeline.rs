//! End-to-end mesh preparation: repair → canonical orientation → volume
//! normalization → re-grounding. The standard entry before segmentation.

use serde::{Deserialize, Serialize};

use crate::config::IngestionConfig;
use crate::error::Result;
use crate::mesh::{
    mass_properties, scale_to_volume, validate_and_repair, RepairOptions, RepairReport,
    TriangleMesh,
};
use crate::segmentation::{orient_canonical, CanonicalReport, UpAxis};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepareReport {
    pub repair: RepairReport,
    pub canonical: CanonicalReport,
    pub scale_factor: f64,
    pub volume: f64,
}

/// Repairs, orients, scales to the target volume, and re-grounds the mesh
/// (min z at 0, center of mass on the z axis).
pub fn prepare_mesh(
    raw: &TriangleMesh,
    up: UpAxis,
    target_volume: f64,
    repair_options: &RepairOptions,
) -> Result<(TriangleMesh, PrepareReport)> {
    let (repaired, repair) = validate_and_repair(raw, repair_options)?;
    let (oriented, canonical) = orient_canonical(&repaired, up)?;
    let before = oriented.signed_volume();
    let mut scaled = scale_to_volume(&oriented, target_volume)?;
    let scale_factor = (target_volume / before).cbrt();

    let props = mass_properties(&scaled, 1.0)?;
    let (min, _) = scaled.bounding_box().expect("non-empty mesh");
    let shift =
        nalgebra::Vector3::new(-props.center_of_mass.x, -props.center_of_mass.y, -min.z);
    scaled.map_vertices(|p| p + shift);

    Ok((
        scaled,
        PrepareReport { repair, canonical, scale_factor, volume: target_volume },
    ))
}

/// Preparation driven by the ingestion config.
pub fn prepare_with(
    raw: &TriangleMesh,
    cfg: &IngestionConfig,
) -> Result<(TriangleMesh, PrepareReport)> {
    prepare_mesh(raw, cfg.up_axis, cfg.target_volume, &RepairOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{synthetic_quadruped, QuadrupedParams};
    use approx::assert_relative_eq;

    #[test]
    fn prepared_creature_is_normalized_and_grounded() {
        let raw = synthetic_quadruped(&QuadrupedParams::default());
        let (mesh, report) =
            prepare_mesh(&raw, UpAxis::Z, 6.3e-3, &RepairOptions::default()).unwrap();
        assert_relative_eq!(mesh.signed_volume(), 6.3e-3, max_relative = 1e-9);
        let (min, _) = mesh.bounding_box().unwrap();
        assert_relative_eq!(min.z, 0.0, epsilon = 1e-12);
        let props = mass_properties(&mesh, 1.0).unwrap();
        assert!(props.center_of_mass.x.abs() < 1e-9);
        assert!(props.center_of_mass.y.abs() < 1e-9);
        assert!(report.scale_factor > 1.0);
    }
}
