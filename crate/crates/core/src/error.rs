use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("testimony stream `{0}` has no stages")]
    EmptyStream(String),

    #[error("stage {stage} out of range for stream `{stream}` ({len} stages)")]
    StageOutOfRange { stream: String, stage: usize, len: usize },

    #[error("stream `{stream}` is not cumulative: stage {stage} drops literals of stage {prev}", prev = stage - 1)]
    NonCumulative { stream: String, stage: usize },

    #[error("inconsistent literal set for `{0}`")]
    InconsistentSpec(String),

    #[error("belief and likelihood maps have different keys")]
    KeyMismatch,

    #[error("beliefs are not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("marginal of `{stream}` is {marginal:e}, at or below the zero-evidence threshold")]
    ZeroEvidence { stream: String, marginal: f64 },

    #[error("literal `{0}` is entailed by the stream; the PWMC closure does not apply")]
    NotApplicable(String),

    #[error("no hypothesis pronounces on `{0}`")]
    Unpronounced(String),

    #[error("hypothesis `{hypothesis}` has no likelihood for stream `{stream}`")]
    MissingSchedule { hypothesis: String, stream: String },

    #[error("unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },

    #[error("duplicate id `{0}`")]
    Duplicate(String),

    #[error("level {level} of the lattice has zero total mass")]
    DegenerateLattice { level: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("stream `{stream}` is not argumentatively complete: {reason}")]
    NotArgComplete { stream: String, reason: String },

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
