use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree limit exceeded: product term of degree {degree} > limit {limit}")]
    DegreeLimit { degree: u32, limit: u32 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unclassified pair: adjoint tower did not terminate or close within cap {cap}")]
    UnclassifiedPair { cap: usize },

    #[error("{what} is not Hermitian (deviation {deviation:e})")]
    NotHermitian { what: String, deviation: f64 },

    #[error("not Gaussian-simulable, use fock_oracle: {0}")]
    NotGaussian(String),

    #[error("generator has degree {degree} in quadratures; variances of higher-degree generators are delegated to fock_oracle")]
    HigherDegreeGenerator { degree: u32 },

    #[error("degenerate measurement: quadrature variance {variance:e}")]
    DegenerateMeasurement { variance: f64 },

    #[error("truncation leakage: population {population:e} in level {level} exceeds {limit:e}")]
    Leakage {
        population: f64,
        level: usize,
        limit: f64,
    },

    #[error("finite-difference passes disagree: coarse {coarse}, fine {fine} (relative {relative:e})")]
    Convergence {
        coarse: f64,
        fine: f64,
        relative: f64,
    },

    #[error("truncation instability: dim {dim} vs {doubled} differ by {deviation:e} on sub-block")]
    TruncationInstability {
        dim: usize,
        doubled: usize,
        deviation: f64,
    },

    #[error("bound violation at N={n}: QFI {qfi} > {bound}")]
    BoundViolation { n: u32, qfi: f64, bound: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for bad input, 3 for numerical-trust failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Domain(_)
            | Error::DegreeLimit { .. }
            | Error::UnclassifiedPair { .. }
            | Error::NotGaussian(_)
            | Error::NotHermitian { .. }
            | Error::DegenerateMeasurement { .. }
            | Error::HigherDegreeGenerator { .. } => 2,
            Error::Leakage { .. }
            | Error::Convergence { .. }
            | Error::TruncationInstability { .. }
            | Error::BoundViolation { .. }
            | Error::DegenerateFit(_) => 3,
            _ => 1,
        }
    }
}
