//! Error types shared across the analysis, simulation, and CLI layers.

use thiserror::Error;

/// Failures of the closed-form plane-wave algebra and spectrum evaluations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// The amplitude quadratic has no real nonnegative root at the requested
    /// point; the point lies off the solution tube.
    #[error("no real nonnegative amplitude at q={q}, discriminant or a0^2 negative")]
    NoRealAmplitude { q: f64 },

    /// The pseudo-continuous spectrum does not exist without feedback.
    #[error("pseudo-continuous spectrum undefined for eta = 0")]
    DegenerateSpectrum,

    /// The long-wavelength expansion divides by C1 = eps*a0^2 + 2*mu*a0^4.
    #[error("long-wavelength expansion invalid: C1 = 0 at a0 = {a0}")]
    DegenerateBranch { a0: f64 },

    /// Parameter outside its documented domain.
    #[error("parameter {name} = {value} out of range: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Failures raised by the method-of-lines integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    /// Requested wavenumber does not fit the periodic grid.
    #[error("wavenumber q={q} is not an integer multiple of 2*pi/L (L={length})")]
    InadmissibleWavenumber { q: f64, length: f64 },

    /// Step control collapsed; the field is stiff or blowing up.
    #[error("step size underflow at t={t}: h={h} below 1e-12 * t_end")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// A non-finite value appeared in the field; integration aborted.
    #[error("non-finite field value at t={t}")]
    NonFiniteField { t: f64 },

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Failures while parsing a scenario configuration file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown key '{key}' at line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("value out of range for '{key}': {message}")]
    Range { key: String, message: String },
}

/// Failures while running a scenario or writing its artifacts.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("artifact schema does not match figure tag '{tag}': expected columns {expected:?}, got {got:?}")]
    SchemaMismatch {
        tag: String,
        expected: Vec<String>,
        got: Vec<String>,
    },

    #[error("scenario '{scenario}' failed at grid node {node}: {source}")]
    NodeFailed {
        scenario: String,
        node: String,
        #[source]
        source: Box<ScenarioError>,
    },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    /// CLI exit code: 1 for configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 1,
            ScenarioError::Io(_) => 1,
            ScenarioError::SchemaMismatch { .. } => 1,
            ScenarioError::NodeFailed { source, .. } => source.exit_code(),
            ScenarioError::Model(_) | ScenarioError::Sim(_) => 2,
        }
    }
}
