//! Variant bank: 10 leg lengths × 3 joint-axis labels = 30 models per
//! source design.
//!
//! Leg elongation translates the lower leg (and its knee joint) down by
//! the increment and stretches the upper leg's z extent to span the gap,
//! which preserves the foot shape. Axis relabeling touches only the joint
//! axes, never geometry.

use serde::{Deserialize, Serialize};

use super::{set_global_axis, KineticRobotModel};
use crate::error::Result;
use crate::mesh::mass_properties;
use crate::segmentation::{Axis, LegTag};

/// Leg elongation per scale-index step, m.
pub const LEG_SCALE_STEP: f64 = 0.005;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BankVariant {
    pub id: String,
    pub scale_index: u8,
    pub axis: Axis,
    pub model: KineticRobotModel,
}

/// The augmented model bank of one source design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantBank {
    pub source_id: String,
    pub variants: Vec<BankVariant>,
    /// Ids of variants dropped for geometric reasons (self-intersection).
    pub dropped: Vec<String>,
}

impl VariantBank {
    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }
}

/// Stretches every leg of `model` down by `scale_index` increments,
/// refreshing mass properties. Geometry only; axes untouched.
pub fn elongate_legs(model: &KineticRobotModel, scale_index: u8) -> Result<KineticRobotModel> {
    let mut out = model.clone();
    let d = scale_index as f64 * LEG_SCALE_STEP;
    if d == 0.0 {
        return Ok(out);
    }
    for tag in LegTag::ALL {
        let upper_idx = KineticRobotModel::upper_link(tag);
        let lower_idx = KineticRobotModel::lower_link(tag);
        let knee_idx = KineticRobotModel::knee_joint(tag);

        // Stretch the upper leg about its top edge so the bottom drops by d.
        let upper = &mut out.links[upper_idx];
        let (min, max) = upper.mesh.bounding_box().expect("non-empty upper");
        let h = max.z - min.z;
        let s = (h + d) / h;
        let top = max.z;
        upper.mesh.map_vertices(|mut p| {
            p.z = top + (p.z - top) * s;
            p
        });
        upper.props = mass_properties(&upper.mesh, out.density)?;

        // Translate the lower leg and knee straight down.
        let lower = &mut out.links[lower_idx];
        lower.mesh.map_vertices(|mut p| {
            p.z -= d;
            p
        });
        lower.props = mass_properties(&lower.mesh, out.density)?;
        out.joints[knee_idx].spec.origin.z -= d;
    }
    Ok(out)
}

/// Elongation never moves limbs toward the base (tops stay fixed), so the
/// only interference to check is a lower leg rising into the base — which
/// a downward translation cannot do. Kept as a guard for exotic inputs.
fn intersects_base(model: &KineticRobotModel) -> bool {
    let Some((base_min, base_max)) = model.links[super::BASE_LINK].mesh.bounding_box() else {
        return false;
    };
    for tag in LegTag::ALL {
        let lower = &model.links[KineticRobotModel::lower_link(tag)];
        if let Some((lo, hi)) = lower.mesh.bounding_box() {
            let overlaps = (0..3).all(|k| lo[k] < base_max[k] && hi[k] > base_min[k]);
            if overlaps && lo.z > base_max.z {
                return true; // lower leg entirely above the base: nonsense
            }
        }
    }
    false
}

/// Generates the 30-variant bank: scale indices 0..=9 × axes {x, y, z}.
/// Variants whose elongation self-intersects are dropped and reported, so
/// a bank may hold fewer than 30 entries.
pub fn generate_variant_bank(model: &KineticRobotModel, source_id: &str) -> Result<VariantBank> {
    let mut variants = Vec::with_capacity(30);
    let mut dropped = Vec::new();
    for scale_index in 0u8..10 {
        let scaled = elongate_legs(model, scale_index)?;
        for axis in Axis::ALL {
            let id = format!("{source_id}_s{scale_index}_{}", axis.name());
            if intersects_base(&scaled) {
                dropped.push(id);
                continue;
            }
            let mut variant = scaled.clone();
            variant.name = id.clone();
            set_global_axis(&mut variant, axis);
            variants.push(BankVariant { id, scale_index, axis, model: variant });
        }
    }
    Ok(VariantBank { source_id: source_id.to_string(), variants, dropped })
}

#[cfg(test)]
mod tests {
    use super::super::tests::test_partition;
    use super::super::{assemble, AssemblyConfig, ElectronicsSpec};
    use super::*;

    fn base_model() -> KineticRobotModel {
        assemble(&test_partition(), &ElectronicsSpec::default(), &AssemblyConfig::default())
            .unwrap()
    }

    #[test]
    fn bank_is_ten_scales_by_three_axes() {
        let bank = generate_variant_bank(&base_model(), "creature").unwrap();
        assert_eq!(bank.len(), 30);
        assert!(bank.dropped.is_empty());
        let mut combos: Vec<(u8, Axis)> =
            bank.variants.iter().map(|v| (v.scale_index, v.axis)).collect();
        combos.dedup();
        assert_eq!(combos.len(), 30);
        for v in &bank.variants {
            assert!(v.scale_index < 10);
        }
    }

    #[test]
    fn scale_zero_default_axis_is_the_input_geometry() {
        let model = base_model();
        let bank = generate_variant_bank(&model, "creature").unwrap();
        let v0 = bank
            .variants
            .iter()
            .find(|v| v.scale_index == 0 && v.axis == Axis::X)
            .unwrap();
        for (a, b) in model.links.iter().zip(&v0.model.links) {
            assert_eq!(a.mesh.vertices, b.mesh.vertices, "{} geometry changed", a.name);
        }
    }

    #[test]
    fn scale_nine_drops_the_foot_by_45mm() {
        let model = base_model();
        let nine = elongate_legs(&model, 9).unwrap();
        for tag in LegTag::ALL {
            let li = KineticRobotModel::lower_link(tag);
            let (base_min, _) = model.links[li].mesh.bounding_box().unwrap();
            let (new_min, _) = nine.links[li].mesh.bounding_box().unwrap();
            let drop = base_min.z - new_min.z;
            assert!((drop - 0.045).abs() < 1e-3, "{}: dropped {drop}", tag.name());
            // Knee follows the lower leg down by exactly the same amount.
            let kj = KineticRobotModel::knee_joint(tag);
            let dk = model.joints[kj].spec.origin.z - nine.joints[kj].spec.origin.z;
            assert!((dk - 0.045).abs() < 1e-12);
            // Total leg reach (shoulder to foot) grows by the increment.
            let sj = KineticRobotModel::shoulder_joint(tag);
            let reach_before = model.joints[sj].spec.origin.z - base_min.z;
            let reach_after = nine.joints[sj].spec.origin.z - new_min.z;
            assert!((reach_after - reach_before - 0.045).abs() < 1e-3);
        }
    }

    #[test]
    fn variant_mass_is_monotone_in_scale_index() {
        let bank = generate_variant_bank(&base_model(), "creature").unwrap();
        let mut masses: Vec<(u8, f64)> = bank
            .variants
            .iter()
            .filter(|v| v.axis == Axis::X)
            .map(|v| (v.scale_index, v.model.total_mass()))
            .collect();
        masses.sort_by_key(|(i, _)| *i);
        for w in masses.windows(2) {
            assert!(w[1].1 >= w[0].1, "mass dropped: {:?}", w);
        }
    }

    #[test]
    fn axis_choice_changes_axes_only() {
        let bank = generate_variant_bank(&base_model(), "creature").unwrap();
        let pick = |axis: Axis| {
            bank.variants
                .iter()
                .find(|v| v.scale_index == 3 && v.axis == axis)
                .unwrap()
        };
        let (x, y) = (pick(Axis::X), pick(Axis::Y));
        for (a, b) in x.model.links.iter().zip(&y.model.links) {
            assert_eq!(a.mesh.vertices, b.mesh.vertices);
            assert_eq!(a.mesh.triangles, b.mesh.triangles);
        }
        for (a, b) in x.model.joints.iter().zip(&y.model.joints) {
            assert_eq!(a.spec.origin, b.spec.origin);
            assert_ne!(a.spec.rotation_axis, b.spec.rotation_axis);
        }
    }
}
