use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("site {site:?} lies outside the window")]
    OutOfWindow { site: Vec<i32> },

    #[error("no boundary spin for exterior site {site:?}")]
    MissingBoundary { site: Vec<i32> },

    #[error("pattern code {code} out of range (pattern space has {size} elements)")]
    CodeOutOfRange { code: u64, size: u128 },

    #[error("pattern space of {sites} sites over {alphabet} symbols overflows a 63-bit code")]
    CodeOverflow { sites: usize, alphabet: usize },

    #[error("state space of {states} configurations exceeds the enumeration cap of {cap}")]
    EnumerationCap { states: u128, cap: u128 },

    #[error("dependence set of {sites} sites exceeds the limit of {limit}")]
    DependenceTooLarge { sites: usize, limit: usize },

    #[error("collar of width {width} is thinner than the interaction range {range}")]
    CollarTooThin { width: usize, range: usize },

    #[error("sub-radius {k} does not fit the window: {reason}")]
    SubRadius { k: usize, reason: String },

    #[error("distribution shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("absolute continuity violated at pattern {pattern}")]
    AbsoluteContinuity { pattern: String },

    #[error("set has zero mass under the measure")]
    ZeroMass,

    #[error("empty set")]
    EmptySet,

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
