//! Shared failure type for the experiment layer.

use std::fmt;

/// What can go wrong while validating a run configuration or executing an
/// experiment. Configuration problems always name the offending key so a
/// caller (the CLI in particular) can report it verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    /// A configuration key is missing, malformed, or out of range.
    ConfigInvalid { key: String, message: String },
    /// The requested swap statistic is not in the registry.
    StatisticUnknown { name: String },
    /// Gap universality needs a minimum pooled sample to say anything.
    InsufficientGaps { pooled: usize },
    /// A core computation (eigensolve, law construction, …) failed.
    Core(String),
    /// Filesystem trouble while writing outputs.
    Io(String),
}

impl ExperimentError {
    /// Convenience constructor for configuration complaints.
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        ExperimentError::ConfigInvalid { key: key.to_string(), message: message.into() }
    }
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::ConfigInvalid { key, message } => {
                write!(f, "invalid config key `{key}`: {message}")
            }
            ExperimentError::StatisticUnknown { name } => {
                write!(f, "unknown statistic `{name}`")
            }
            ExperimentError::InsufficientGaps { pooled } => {
                write!(f, "only {pooled} pooled gaps; need at least 1000")
            }
            ExperimentError::Core(message) => write!(f, "computation failed: {message}"),
            ExperimentError::Io(message) => write!(f, "io error: {message}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}

impl From<rmt_core::resolvent::ResolventError> for ExperimentError {
    fn from(e: rmt_core::resolvent::ResolventError) -> Self {
        ExperimentError::Core(e.to_string())
    }
}

impl From<rmt_core::linalg::LinalgError> for ExperimentError {
    fn from(e: rmt_core::linalg::LinalgError) -> Self {
        ExperimentError::Core(e.to_string())
    }
}

impl From<rmt_core::entrylaws::EntryLawError> for ExperimentError {
    fn from(e: rmt_core::entrylaws::EntryLawError) -> Self {
        ExperimentError::Core(e.to_string())
    }
}

impl From<rmt_core::profiles::ProfileError> for ExperimentError {
    fn from(e: rmt_core::profiles::ProfileError) -> Self {
        ExperimentError::Core(e.to_string())
    }
}

impl From<rmt_core::semicircle::SemicircleError> for ExperimentError {
    fn from(e: rmt_core::semicircle::SemicircleError) -> Self {
        ExperimentError::Core(e.to_string())
    }
}

impl From<rmt_core::spectra::SpectraError> for ExperimentError {
    fn from(e: rmt_core::spectra::SpectraError) -> Self {
        ExperimentError::Core(e.to_string())
    }
}
