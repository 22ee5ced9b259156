use matchplan_lp::LpError;

use crate::market::{PlanViolation, TransitionError, ValidationError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Solver(#[from] LpError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error("LP vertex is not integral at variable {variable} (value {value})")]
    NonIntegralVertex { variable: String, value: f64 },
    #[error("the multi-period model needs time-homogeneous like probabilities")]
    TimeInhomogeneousMultiPeriod,
    #[error("{policy} needs horizon {expected}, instance has {actual}")]
    UnsupportedHorizon { policy: String, expected: String, actual: usize },
    #[error("algorithm {algorithm} cannot run under design {design}")]
    IncompatibleAlgorithmDesign { algorithm: String, design: String },
    #[error("{count} displayed edges exceed the enumeration limit of {limit}")]
    TooManyEdges { count: usize, limit: usize },
    #[error("state space of at least {estimate} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { estimate: u64, cap: u64 },
    #[error("local search exceeded {cap} improving moves")]
    IterationCapExceeded { cap: usize },
    #[error("bad generator parameters: {0}")]
    BadGeneratorParams(String),
    #[error("policy {policy} emitted an infeasible plan in period {period}: {violations:?}")]
    InfeasiblePlan { policy: String, period: usize, violations: Vec<PlanViolation> },
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
