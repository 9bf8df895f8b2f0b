//! Error type shared across the library.

use thiserror::Error;

use crate::types::JointId;

#[derive(Debug, Error)]
pub enum GaitError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("non-monotone timestamps: frame {frame} has t={t} after t={prev}")]
    Ordering { frame: usize, t: f64, prev: f64 },

    #[error("missing joint {0}")]
    MissingJoint(JointId),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("event sequencing error: {0}")]
    Sequencing(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("insufficient landmarks: {0}")]
    InsufficientLandmarks(String),

    #[error("inconsistent landmarks: {0}")]
    InconsistentLandmarks(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("no overlapping frames between estimate and reference")]
    EmptyOverlap,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid feature: {0}")]
    InvalidFeature(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl GaitError {
    /// Stable process exit code for the CLI.
    /// 0 ok, 2 config, 3 parse, 4 insufficient data, 5 sync failure, 6 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            GaitError::Config(_) | GaitError::SchemaMismatch(_) => 2,
            GaitError::Parse { .. } | GaitError::Ordering { .. } => 3,
            GaitError::EmptyInput(_)
            | GaitError::InsufficientData(_)
            | GaitError::MissingJoint(_)
            | GaitError::EmptyOverlap => 4,
            GaitError::InsufficientLandmarks(_) | GaitError::InconsistentLandmarks(_) => 5,
            _ => 6,
        }
    }

    /// Stable machine-readable error category.
    pub fn kind(&self) -> &'static str {
        match self {
            GaitError::Config(_) => "config",
            GaitError::Parse { .. } => "parse",
            GaitError::SchemaMismatch(_) => "schema_mismatch",
            GaitError::Ordering { .. } => "ordering",
            GaitError::MissingJoint(_) => "missing_joint",
            GaitError::DegenerateGeometry(_) => "degenerate_geometry",
            GaitError::DegenerateFit(_) => "degenerate_fit",
            GaitError::Sequencing(_) => "sequencing",
            GaitError::Range(_) => "range",
            GaitError::InsufficientLandmarks(_) => "insufficient_landmarks",
            GaitError::InconsistentLandmarks(_) => "inconsistent_landmarks",
            GaitError::EmptyInput(_) => "empty_input",
            GaitError::EmptyOverlap => "empty_overlap",
            GaitError::InsufficientData(_) => "insufficient_data",
            GaitError::InvalidFeature(_) => "invalid_feature",
            GaitError::Io(_) => "io",
        }
    }
}
