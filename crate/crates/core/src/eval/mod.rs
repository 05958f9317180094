//! Locomotion scoring: sinusoid gait search over physics rollouts with the
//! per-step reward, preference-scaled fitness, and an exchange protocol
//! that lets an external trainer act as the inner loop.

mod builtin;
mod gait;
mod protocol;
mod result;

pub use builtin::{rollout, BuiltinEvaluator, GaitSearchConfig};
pub use gait::{GaitParams, LevelWave};
pub use protocol::{Endpoint, EvalRequest, EvalResponse, ExternalEvaluator, PROTOCOL_SCHEMA};
pub use result::{compute_fitness, EvaluationResult, Preference};
