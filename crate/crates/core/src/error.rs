use thiserror::Error;

use crate::expcli::ConfigErrors;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert space layout: {0}")]
    InvalidLayout(String),

    #[error("atom index {index} out of range for {n_atoms} atom(s)")]
    AtomIndexOutOfRange { index: usize, n_atoms: usize },

    #[error("basis state out of range: {0}")]
    ExcitationOutOfRange(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {max_deviation:e})")]
    NotHermitian { max_deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("state is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("step size underflow at t = {time} ns")]
    StepSizeUnderflow { time: f64 },

    #[error("integration tolerance not met at t = {time} ns: {what}")]
    ToleranceNotMet { time: f64, what: String },

    #[error("too few extrema in `{observable}`: found {found}, need at least {required}")]
    TooFewExtrema {
        observable: String,
        found: usize,
        required: usize,
    },

    #[error("envelope of `{0}` does not decay")]
    NonDecayingEnvelope(String),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),

    #[error("field map line {line}: {reason}")]
    FieldMapParse { line: usize, reason: String },

    #[error("invalid field map: {0}")]
    InvalidFieldMap(String),

    #[error("position ({x} nm, {y} nm, {z} nm) lies outside the field-map grid")]
    OutsideGrid { x: f64, y: f64, z: f64 },

    #[error("energy density vanishes at ({x} nm, {y} nm, {z} nm); mode volume is unbounded")]
    UnboundedModeVolume { x: f64, y: f64, z: f64 },

    #[error("{0}")]
    Config(ConfigErrors),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
