//! Genetic operators. Both act on whole body levels, so symmetry survives
//! by construction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::genome::{Lineage, MutationCategory, OperationTag, RobotGenome};
use super::repository::{DesignRepository, LimbLevel};
use crate::segmentation::Axis;

/// Category probabilities: limb length 15%, limb shape 15%, body shape
/// 25%, joint axis 40%, no-op 5%.
fn draw_category(rng: &mut ChaCha8Rng) -> MutationCategory {
    let u: f64 = rng.gen();
    if u < 0.15 {
        MutationCategory::LimbLength
    } else if u < 0.30 {
        MutationCategory::LimbShape
    } else if u < 0.55 {
        MutationCategory::BodyShape
    } else if u < 0.95 {
        MutationCategory::JointAxis
    } else {
        MutationCategory::NoOp
    }
}

fn pick_other<'a>(ids: &'a [String], current: &str, rng: &mut ChaCha8Rng) -> Option<&'a String> {
    let candidates: Vec<&String> = ids.iter().filter(|id| id.as_str() != current).collect();
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.gen_range(0..candidates.len())])
    }
}

/// Mutates one genome: exactly one category fires. A category with no
/// usable alternative degenerates to a flagged no-op.
pub fn mutate(
    parent: &RobotGenome,
    parent_id: u64,
    repo: &DesignRepository,
    rng: &mut ChaCha8Rng,
) -> RobotGenome {
    let mut child = parent.clone();
    let category = draw_category(rng);
    let mut degenerate = false;
    match category {
        MutationCategory::LimbLength => {
            let up = rng.gen_bool(0.5);
            let next = if up {
                (parent.leg_scale_index + 1).min(9)
            } else {
                parent.leg_scale_index.saturating_sub(1)
            };
            degenerate = next == parent.leg_scale_index;
            child.leg_scale_index = next;
        }
        MutationCategory::LimbShape => {
            let level = if rng.gen_bool(0.5) { LimbLevel::Upper } else { LimbLevel::Lower };
            let ids = repo.limb_ids(level);
            let current =
                if level == LimbLevel::Upper { &parent.upper_choice } else { &parent.lower_choice };
            match pick_other(&ids, current, rng) {
                Some(id) => match level {
                    LimbLevel::Upper => child.upper_choice = id.clone(),
                    LimbLevel::Lower => child.lower_choice = id.clone(),
                },
                None => degenerate = true,
            }
        }
        MutationCategory::BodyShape => {
            let ids = repo.body_ids();
            match pick_other(&ids, &parent.body_choice, rng) {
                Some(id) => child.body_choice = id.clone(),
                None => degenerate = true,
            }
        }
        MutationCategory::JointAxis => {
            let shoulder_level = rng.gen_bool(0.5);
            let axis = Axis::ALL[rng.gen_range(0..3)];
            if shoulder_level {
                child.shoulder_axis = axis;
            } else {
                child.knee_axis = axis;
            }
        }
        MutationCategory::NoOp => {}
    }
    child.lineage = Lineage {
        parents: vec![parent_id],
        op: OperationTag::Mutation { category, degenerate },
    };
    child
}

/// Crossover: duplicate `a`, then with 50% probability swap one joint-axis
/// level from `b`, otherwise swap one limb level (geometry id plus the
/// scale ladder position, which rides with the limbs).
pub fn crossover(
    a: &RobotGenome,
    a_id: u64,
    b: &RobotGenome,
    b_id: u64,
    rng: &mut ChaCha8Rng,
) -> RobotGenome {
    let mut child = a.clone();
    let swapped_joint = rng.gen_bool(0.5);
    if swapped_joint {
        if rng.gen_bool(0.5) {
            child.shoulder_axis = b.shoulder_axis;
        } else {
            child.knee_axis = b.knee_axis;
        }
    } else {
        if rng.gen_bool(0.5) {
            child.upper_choice = b.upper_choice.clone();
        } else {
            child.lower_choice = b.lower_choice.clone();
        }
        child.leg_scale_index = b.leg_scale_index;
    }
    child.lineage =
        Lineage { parents: vec![a_id, b_id], op: OperationTag::Crossover { swapped_joint } };
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    fn plain_genome(source: &str, shoulder: Axis, knee: Axis) -> RobotGenome {
        RobotGenome {
            source_id: source.into(),
            body_choice: DesignRepository::body_id(source),
            upper_choice: DesignRepository::limb_id(source, LimbLevel::Upper),
            lower_choice: DesignRepository::limb_id(source, LimbLevel::Lower),
            leg_scale_index: 4,
            shoulder_axis: shoulder,
            knee_axis: knee,
            lineage: Lineage { parents: vec![], op: OperationTag::Init },
        }
    }

    #[test]
    fn category_frequencies_match_the_draw_table() {
        let mut rng = rng_for(11, "freq", &[]);
        let mut counts = [0usize; 5];
        let n = 100_000;
        for _ in 0..n {
            let idx = match draw_category(&mut rng) {
                MutationCategory::LimbLength => 0,
                MutationCategory::LimbShape => 1,
                MutationCategory::BodyShape => 2,
                MutationCategory::JointAxis => 3,
                MutationCategory::NoOp => 4,
            };
            counts[idx] += 1;
        }
        let expect = [0.15, 0.15, 0.25, 0.40, 0.05];
        for (i, &e) in expect.iter().enumerate() {
            let got = counts[i] as f64 / n as f64;
            assert!((got - e).abs() < 0.01, "category {i}: {got} vs {e}");
        }
    }

    #[test]
    fn self_crossover_is_identity_up_to_lineage() {
        let g = plain_genome("s", Axis::X, Axis::Y);
        let mut rng = rng_for(3, "xover", &[]);
        for _ in 0..50 {
            let child = crossover(&g, 1, &g, 1, &mut rng);
            assert_eq!(child.body_choice, g.body_choice);
            assert_eq!(child.upper_choice, g.upper_choice);
            assert_eq!(child.lower_choice, g.lower_choice);
            assert_eq!(child.leg_scale_index, g.leg_scale_index);
            assert_eq!(child.shoulder_axis, g.shoulder_axis);
            assert_eq!(child.knee_axis, g.knee_axis);
        }
    }

    #[test]
    fn knee_level_swap_moves_only_the_knee_axis() {
        let a = plain_genome("a", Axis::X, Axis::X);
        let b = plain_genome("b", Axis::Y, Axis::Z);
        let mut rng = rng_for(5, "xover", &[]);
        // Find a draw that swaps the knee level and check the outcome.
        let mut seen_knee_swap = false;
        for _ in 0..200 {
            let child = crossover(&a, 1, &b, 2, &mut rng);
            if let OperationTag::Crossover { swapped_joint: true } = child.lineage.op {
                if child.knee_axis == Axis::Z {
                    assert_eq!(child.shoulder_axis, Axis::X);
                    seen_knee_swap = true;
                }
            }
        }
        assert!(seen_knee_swap);
    }

    #[test]
    fn joint_swap_rate_is_half() {
        let a = plain_genome("a", Axis::X, Axis::X);
        let b = plain_genome("b", Axis::Y, Axis::Z);
        let mut rng = rng_for(7, "rate", &[]);
        let n = 10_000;
        let mut joint_swaps = 0;
        for _ in 0..n {
            if let OperationTag::Crossover { swapped_joint: true } =
                crossover(&a, 1, &b, 2, &mut rng).lineage.op
            {
                joint_swaps += 1;
            }
        }
        let frac = joint_swaps as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "joint swap fraction {frac}");
    }

    #[test]
    fn scale_clamp_at_the_ladder_top_is_flagged() {
        let mut g = plain_genome("only", Axis::X, Axis::X);
        g.leg_scale_index = 9;
        let repo = DesignRepository::default();
        let mut rng = rng_for(13, "clamp", &[]);
        let mut saw_clamp = false;
        for _ in 0..500 {
            let child = mutate(&g, 1, &repo, &mut rng);
            if let OperationTag::Mutation {
                category: MutationCategory::LimbLength,
                degenerate,
            } = child.lineage.op
            {
                if child.leg_scale_index == 9 && degenerate {
                    saw_clamp = true;
                }
                assert!(child.leg_scale_index <= 9);
            }
        }
        assert!(saw_clamp, "never drew an upward step at the top of the ladder");
    }

    #[test]
    fn empty_repo_degrades_shape_mutations_to_flagged_noops() {
        let g = plain_genome("solo", Axis::X, Axis::X);
        let repo = DesignRepository::default();
        let mut rng = rng_for(17, "noop", &[]);
        for _ in 0..300 {
            let child = mutate(&g, 1, &repo, &mut rng);
            if let OperationTag::Mutation {
                category: MutationCategory::BodyShape | MutationCategory::LimbShape,
                degenerate,
            } = child.lineage.op
            {
                assert!(degenerate);
                assert_eq!(child.body_choice, g.body_choice);
            }
        }
    }
}
