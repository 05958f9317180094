//! Error types shared across the pipeline.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline errors, grouped by the stage that raises them.
#[derive(Debug, Error)]
pub enum Error {
    /// Mesh file could not be parsed in the declared format.
    #[error("mesh format error: {0}")]
    MeshFormat(String),

    /// Input mesh is empty or collapses to zero measure.
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    /// Repair could not produce a watertight, orientable mesh.
    #[error("unrepairable mesh: {0}")]
    Unrepairable(String),

    /// Signed volume is negative: triangle winding is inverted.
    #[error("inverted mesh orientation: signed volume {volume} < 0")]
    InvertedOrientation { volume: f64 },

    /// A plane cut kept nothing.
    #[error("plane cut produced an empty mesh: {0}")]
    EmptyCut(String),

    /// Joint allocation failed; the candidate mesh is rejected.
    #[error("segmentation failure: {0}")]
    Segmentation(String),

    /// Partition or electronics invariants do not hold at assembly.
    #[error("assembly error: {0}")]
    Assembly(String),

    /// Bad or missing configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Remote candidate generation failed.
    #[error("ingestion error: {0}")]
    Ingestion(String),

    /// Evaluation failed (rollout divergence, protocol error, timeout).
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// External evaluator did not answer within the deadline.
    #[error("evaluation timed out after {seconds} s")]
    EvaluationTimeout { seconds: u64 },

    /// External evaluator response violates the exchange schema.
    #[error("malformed evaluator response: {0}")]
    MalformedResponse(String),

    #[error("urdf parse error: {0}")]
    UrdfParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code class for the CLI: 2 config, 3 ingestion,
    /// 4 geometry/segmentation, 5 evaluation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Ingestion(_) => 3,
            Error::MeshFormat(_)
            | Error::DegenerateMesh(_)
            | Error::Unrepairable(_)
            | Error::InvertedOrientation { .. }
            | Error::EmptyCut(_)
            | Error::Segmentation(_)
            | Error::Assembly(_)
            | Error::UrdfParse(_) => 4,
            Error::Evaluation(_)
            | Error::EvaluationTimeout { .. }
            | Error::MalformedResponse(_) => 5,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
