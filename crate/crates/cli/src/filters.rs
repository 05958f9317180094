//! Candidate acceptance filters: single connected component, bilateral
//! symmetry above threshold, and four detectable legs.

use quadforge::config::{GlobalConfig, IngestionConfig};
use quadforge::mesh::{
    bilateral_symmetry_score, connected_components, Plane, SymmetrySampling, TriangleMesh,
};
use quadforge::pipeline::prepare_with;
use quadforge::segmentation::{find_separation_planes, place_shoulder_joints};
use serde::{Deserialize, Serialize};

/// One candidate's filter outcome. `accepted` is exactly the conjunction
/// of the three checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateChecks {
    pub id: String,
    pub connectivity_ok: bool,
    pub component_count: usize,
    pub symmetry_score: f64,
    pub symmetry_ok: bool,
    pub legs_ok: bool,
    pub accepted: bool,
    pub notes: Vec<String>,
}

/// Report over an ingestion batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateReport {
    pub prompt: Option<String>,
    pub candidates: Vec<CandidateChecks>,
}

impl CandidateReport {
    pub fn accepted_ids(&self) -> Vec<&str> {
        self.candidates
            .iter()
            .filter(|c| c.accepted)
            .map(|c| c.id.as_str())
            .collect()
    }
}

/// Runs the three checks. Returns the prepared (repaired, canonical,
/// scaled) mesh when the candidate is usable downstream.
pub fn check_candidate(
    id: &str,
    raw: &TriangleMesh,
    cfg: &GlobalConfig,
) -> (CandidateChecks, Option<TriangleMesh>) {
    let mut checks = CandidateChecks {
        id: id.to_string(),
        connectivity_ok: false,
        component_count: 0,
        symmetry_score: 0.0,
        symmetry_ok: false,
        legs_ok: false,
        accepted: false,
        notes: Vec::new(),
    };

    let prepared = match prepare_with(raw, &cfg.ingestion) {
        Ok((mesh, _)) => mesh,
        Err(e) => {
            checks.notes.push(format!("preparation failed: {e}"));
            return (checks, None);
        }
    };

    let components = connected_components(&prepared);
    checks.component_count = components.len();
    checks.connectivity_ok = components.len() == 1;
    if !checks.connectivity_ok {
        checks.notes.push(format!("{} disjoint bodies", components.len()));
    }

    checks.symmetry_score = detected_midplane_score(&prepared, &cfg.ingestion);
    checks.symmetry_ok = checks.symmetry_score >= cfg.ingestion.symmetry_threshold;
    if !checks.symmetry_ok {
        checks.notes.push(format!(
            "symmetry {:.3} below threshold {:.2}",
            checks.symmetry_score, cfg.ingestion.symmetry_threshold
        ));
    }

    checks.legs_ok = match find_separation_planes(&prepared, &cfg.segmentation) {
        Ok((front, rear, _)) => match place_shoulder_joints(&prepared, (&front, &rear)) {
            Ok(_) => true,
            Err(e) => {
                checks.notes.push(format!("leg detection: {e}"));
                false
            }
        },
        Err(e) => {
            checks.notes.push(format!("leg detection: {e}"));
            false
        }
    };

    checks.accepted = checks.connectivity_ok && checks.symmetry_ok && checks.legs_ok;
    (checks, Some(prepared))
}

/// Best score over the two axis-aligned vertical mid-planes through the
/// center of mass (the canonical frame puts the COM on the z axis).
fn detected_midplane_score(mesh: &TriangleMesh, cfg: &IngestionConfig) -> f64 {
    let sampling = SymmetrySampling { samples: cfg.symmetry_samples, seed: cfg.symmetry_seed };
    let lateral = bilateral_symmetry_score(mesh, &Plane::axis_aligned(0, 0.0), sampling);
    let longitudinal = bilateral_symmetry_score(mesh, &Plane::axis_aligned(1, 0.0), sampling);
    lateral.max(longitudinal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadforge::shapes::{cuboid, synthetic_quadruped, QuadrupedParams};

    fn cfg() -> GlobalConfig {
        let mut cfg = GlobalConfig::default();
        // Coarser sampling keeps filter tests quick.
        cfg.ingestion.symmetry_samples = 30_000;
        cfg
    }

    #[test]
    fn sound_creature_is_accepted() {
        let raw = synthetic_quadruped(&QuadrupedParams::default());
        let (checks, prepared) = check_candidate("ok", &raw, &cfg());
        assert!(checks.connectivity_ok, "{checks:?}");
        assert!(checks.symmetry_ok, "{checks:?}");
        assert!(checks.legs_ok, "{checks:?}");
        assert!(checks.accepted);
        assert!(prepared.is_some());
    }

    #[test]
    fn disjoint_blob_fails_connectivity() {
        let raw = synthetic_quadruped(&QuadrupedParams {
            extra_blob: true,
            ..QuadrupedParams::default()
        });
        let (checks, _) = check_candidate("blob", &raw, &cfg());
        assert!(!checks.connectivity_ok);
        assert!(!checks.accepted);
    }

    #[test]
    fn missing_leg_fails_symmetry() {
        let raw = synthetic_quadruped(&QuadrupedParams {
            drop_leg: Some(1),
            ..QuadrupedParams::default()
        });
        let (checks, _) = check_candidate("lame", &raw, &cfg());
        assert!(!checks.symmetry_ok, "score {}", checks.symmetry_score);
        assert!(!checks.accepted);
    }

    #[test]
    fn legless_prism_fails_leg_detection() {
        let raw = cuboid(nalgebra::Vector3::new(0.06, 0.15, 0.04));
        let (checks, _) = check_candidate("prism", &raw, &cfg());
        assert!(!checks.legs_ok);
        assert!(!checks.accepted);
        // A box is perfectly symmetric; only the leg check fails.
        assert!(checks.symmetry_ok);
        assert!(checks.accepted == (checks.connectivity_ok && checks.symmetry_ok && checks.legs_ok));
    }
}
