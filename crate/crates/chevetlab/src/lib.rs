//! Library and experiment harness for desk-scale verification of Chevet-type
//! operator-norm bounds for isotropic log-concave unconditional random
//! matrices, together with the submatrix/restricted-isometry machinery,
//! gamma-functional chaining estimates, and sparse-net constructions that
//! come with them.
//!
//! The crate is organized around six module groups:
//!
//! * [`ensembles`] — seeded samplers for every random object (exponential,
//!   gaussian, cube, lp-ball rows, rotated ensembles) plus statistical
//!   self-audits.
//! * [`geometry`] — symmetric convex bodies, their gauges and polars, and
//!   operator norms between them with honest exactness flags.
//! * [`submatrix`] — combinatorial suprema over row/column supports and the
//!   restricted isometry constant, exact by enumeration or greedy lower
//!   bounds.
//! * [`chaining`] — gamma_q functionals on finite sets, empirical suprema of
//!   gaussian/exponential processes, and the leveled sparse-net hierarchy.
//! * [`bounds`] — closed-form and Monte Carlo evaluation of the two-term
//!   norm bounds, tail shapes, and admissible sparsity thresholds.
//! * [`harness`] — the seeded, reproducible experiment runner behind the
//!   `chevetlab` CLI.

pub mod bounds;
pub mod chaining;
pub mod ensembles;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod mat;
pub mod rng;
pub mod stats;
pub mod submatrix;

pub use mat::Matrix;
pub use stats::EstimateWithCI;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("exact mode over budget: {0}")]
    OverBudget(String),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("invalid experiment grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
