//! Error types shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The shifted pencil (sE_q - A_q) is numerically singular at `point`.
    /// `level` is the 1-based position inside the word chain, when applicable.
    #[error("{}", singular_resolvent_msg(.mode, .point, .level))]
    SingularResolvent {
        mode: usize,
        point: Complex64,
        level: Option<usize>,
    },

    /// An equivalence-transform factor is numerically singular.
    #[error("singular transform matrix for mode {mode} ({side} side)")]
    SingularTransform { mode: usize, side: &'static str },

    /// Interpolation-point lists do not match the requested layout.
    #[error("point count mismatch: {context} expects {expected} points, got {got}")]
    CountMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A left point coincides with a right point; the pencil entries would divide by zero.
    #[error("left and right point lists overlap at {point}")]
    PointOverlap { point: Complex64 },

    /// A transfer-function sample needed by the Loewner assembly is absent.
    #[error("missing sample for word {word}")]
    MissingSample { word: String },

    /// A divided difference pairs two identical points.
    #[error("coincident interpolation points mu = lambda = {point}")]
    CoincidentPoints { point: Complex64 },

    /// A Loewner matrix is not square or is numerically singular.
    #[error("Loewner matrix for mode {mode} is singular or not square ({rows}x{cols})")]
    SingularLoewner { mode: usize, rows: usize, cols: usize },

    /// An interpolation point is an eigenvalue of a Loewner pencil.
    #[error("interpolation point {point} is an eigenvalue of the mode-{mode} Loewner pencil")]
    EigenpointCollision { mode: usize, point: Complex64 },

    /// Requested truncation rank exceeds the pencil dimensions.
    #[error("requested rank {requested} for mode {mode} exceeds pencil size {max}")]
    RankTooLarge { mode: usize, requested: usize, max: usize },

    /// All singular values of a Loewner matrix are zero.
    #[error("degenerate Loewner data for mode {mode}: largest singular value is zero")]
    DegenerateData { mode: usize },

    /// Tuple sets are not closed under complex conjugation.
    #[error("tuple sets are not conjugate-closed: no partner for word {word}")]
    NotConjugateClosed { word: String },

    /// Loewner data still carries non-negligible imaginary parts; realify first.
    #[error("Loewner data for mode {mode} is complex (max |Im| = {max_imag:.3e}); realify before realization")]
    ComplexData { mode: usize, max_imag: f64 },

    /// A mode pencil (A_q, E_q) has an eigenvalue outside the open left half-plane.
    #[error("mode {mode} is not asymptotically stable (eigenvalue {eig})")]
    UnstableMode { mode: usize, eig: Complex64 },

    /// Matrix dimensions are inconsistent with the operation.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// The simulated state left the overflow guard.
    #[error("state diverged beyond overflow guard at t = {t}")]
    NonFiniteState { t: f64 },

    /// A switching-signal event is malformed.
    #[error("invalid switching signal: {reason}")]
    InvalidSignal { reason: String },

    /// Configuration or input-file problem reported by the CLI layer.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn singular_resolvent_msg(mode: &usize, point: &Complex64, level: &Option<usize>) -> String {
    match level {
        Some(l) => format!("singular resolvent in mode {mode} at point {point} (word level {l})"),
        None => format!("singular resolvent in mode {mode} at point {point}"),
    }
}

impl Error {
    /// Machine-readable error kind, used by the CLI for stderr JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularResolvent { .. } => "singular-resolvent",
            Error::SingularTransform { .. } => "singular-transform",
            Error::CountMismatch { .. } => "count-mismatch",
            Error::PointOverlap { .. } => "point-overlap",
            Error::MissingSample { .. } => "missing-sample",
            Error::CoincidentPoints { .. } => "coincident-points",
            Error::SingularLoewner { .. } => "singular-loewner",
            Error::EigenpointCollision { .. } => "eigenpoint-collision",
            Error::RankTooLarge { .. } => "rank-too-large",
            Error::DegenerateData { .. } => "degenerate-data",
            Error::NotConjugateClosed { .. } => "not-conjugate-closed",
            Error::ComplexData { .. } => "complex-data",
            Error::UnstableMode { .. } => "unstable-mode",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NonFiniteState { .. } => "non-finite-state",
            Error::InvalidSignal { .. } => "invalid-signal",
            Error::InvalidInput(_) => "invalid-input",
        }
    }
}
