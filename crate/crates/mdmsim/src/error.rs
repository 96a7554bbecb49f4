//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: String,
        left: usize,
        right: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix labeled lossless is not unitary (max deviation {deviation:.3e})")]
    NotLossless { deviation: f64 },

    #[error("coupling ratio alpha = {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("width {width_nm} nm outside table range [{min_nm}, {max_nm}] nm (no extrapolation)")]
    WidthOutOfRange {
        width_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("invalid index table: {0}")]
    InvalidTable(String),

    #[error("no width in table where mode {mode} reaches effective index {reference}")]
    NoIndexMatch { mode: usize, reference: f64 },

    #[error("insufficient fringes: spectrum spans {fringes:.3} fringe periods, need at least 1")]
    InsufficientFringes { fringes: f64 },

    #[error("extinction ratio {0} dB is negative")]
    NegativeExtinctionRatio(f64),

    #[error(
        "target {target:.6} on channel {channel} unreachable; reachable range is \
         [{min:.6}, {max:.6}]"
    )]
    UnreachableWeight {
        channel: usize,
        target: f64,
        min: f64,
        max: f64,
    },

    #[error("mixing matrix too ill-conditioned to invert: condition number {condition:.3e} > {limit:.1e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("matrix is singular and cannot be inverted")]
    Singular,

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
