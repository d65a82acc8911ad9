use alloc::string::String;

use thiserror::Error;

/// Errors produced by the explanation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid value for feature `{feature}`: {message}")]
    InvalidValue { feature: String, message: String },

    #[error("value {value} for feature `{feature}` is outside its range [{min}, {max}]")]
    Range {
        feature: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("attribution does not add up: base + sum(contributions) differs from prediction by {gap}")]
    EfficiencyViolation { gap: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("class {class} is already the predicted class")]
    SameClass { class: usize },

    #[error("format `{format}` is not supported for reference method `{reference}`")]
    UnsupportedFormat { reference: String, format: String },

    #[error("missing explanation input: {0}")]
    MissingExplanation(String),

    #[error("unknown audience `{0}`")]
    UnknownAudience(String),
}

pub type Result<T> = core::result::Result<T, Error>;
