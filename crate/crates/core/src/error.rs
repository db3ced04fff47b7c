use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::ModelKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("requested {requested} edges but a {n}-node graph has at most {max}")]
    TooManyEdges { n: usize, requested: usize, max: usize },

    #[error("invalid coupling matrix: {0}")]
    InvalidCouplings(String),

    #[error("invalid spin configuration: {0}")]
    InvalidSpins(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid integrator config: {0}")]
    InvalidIntegrator(String),

    #[error("non-finite state at step {step} (t = {t}); reduce dt")]
    NonFinite { step: usize, t: f64 },

    #[error("not a Type I fixed point: {0}")]
    NotTypeOne(String),

    #[error("fixed point is in the {found} class, expected {expected}")]
    WrongFixedPointClass {
        expected: &'static str,
        found: &'static str,
    },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("{n} nodes exceeds the enumeration limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("no bifurcation detected above threshold {threshold}; increase ks-max or t-end")]
    NoBifurcation { threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model {0} is not part of this report")]
    ModelAbsent(ModelKind),

    #[error("{model} trial {trial}: {source}")]
    Trial {
        model: ModelKind,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report format: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFinite { .. } | Error::NotSymmetric { .. } | Error::Eigen(_) => true,
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
