//! Crate-wide error type.

use crate::measure::Interval;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: lo={lo} must be strictly less than hi={hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("domain mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: Interval, found: Interval },

    #[error("point {point} lies outside domain {domain}")]
    PointOutsideDomain { point: f64, domain: Interval },

    #[error("empty point pattern where at least one point is required")]
    EmptyPattern,

    #[error("empty collection: {0}")]
    EmptyCollection(&'static str),

    #[error("point count mismatch: {left} vs {right}")]
    CountMismatch { left: usize, right: usize },

    #[error("invalid CDF data: {0}")]
    InvalidCdf(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
