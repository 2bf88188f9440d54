use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A topology or problem invariant does not hold. `invariant` names it.
    #[error("invalid topology: {invariant}")]
    Validation { invariant: String },

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("no path from {source_node} to {destination}")]
    NoPath {
        source_node: String,
        destination: String,
    },

    #[error("IS space too large ({cap} maximal sets reached); use column generation")]
    IsSpaceTooLarge { cap: usize },

    #[error("malformed LP: {0}")]
    MalformedLp(String),

    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),

    #[error("upper bound undefined for heterogeneous energies")]
    HeterogeneousEnergy,

    #[error("energy model inconsistency: {0}")]
    EnergyInconsistency(String),

    #[error("stage 2 infeasible: throughput target {target} exceeds capacity")]
    TargetInfeasible { target: f64 },

    #[error("unexpected LP status in {stage}: {status:?}")]
    UnexpectedStatus {
        stage: &'static str,
        status: crate::lp::LpStatus,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(invariant: impl Into<String>) -> Self {
        Error::Validation {
            invariant: invariant.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
