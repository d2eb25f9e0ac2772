//! Error types shared by the library.

use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("model validation failed with {} finding(s):\n{}", .0.len(),
            .0.iter().map(|d| format!("  {}", d)).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<Diagnostic>),
}

#[derive(Debug, Error)]
pub enum ConstraintError {
    #[error("kcat for reaction '{0}' must be positive")]
    NonpositiveKcat(String),
    #[error("reversible reaction '{0}' has no backward kcat in the assignment")]
    MissingBackwardKcat(String),
    #[error("enzyme '{enzyme}' catalyzes {n_rev} reversible reactions; the sign-combination expansion is capped at 16")]
    TooManyReversible { enzyme: String, n_rev: usize },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("time step {h} does not divide {what} {value} within tolerance")]
    IncommensurateGrid { what: &'static str, h: f64, value: f64 },
    #[error("initial amounts must be nonnegative")]
    NegativeInitialState,
    #[error("prediction horizon p = {p} must be at least the step size h = {h}")]
    HorizonTooShort { p: f64, h: f64 },
    #[error("linear program is infeasible{}", .row_class.map(|c| format!(" (first violated row class: {})", c)).unwrap_or_default())]
    Infeasible { row_class: Option<crate::discretization::RowClass> },
    #[error("linear program is unbounded; the model is missing flux bounds")]
    Unbounded,
    #[error("LP solver hit its iteration limit")]
    IterationLimit,
    #[error("iteration {iteration} (t = {time}) failed: {source}")]
    AtIteration {
        iteration: usize,
        time: f64,
        #[source]
        source: Box<SolveError>,
    },
    #[error("infeasible coupled program; scenario {scenario} ('{label}') holds the violated rows")]
    InfeasibleScenario { scenario: usize, label: String },
    #[error("{0}")]
    BadInput(String),
}

#[derive(Debug, Error)]
pub enum HorizonError {
    #[error("no exponential growth is possible (mu_max = 0) while the linear bound has positive slope")]
    NoExponentialGrowth,
    #[error("initial biomass must be positive for the growth-rate program")]
    ZeroBiomass,
    #[error("root bracketing exceeded the expansion cap without a sign change")]
    BracketExhausted,
    #[error(transparent)]
    Solve(#[from] Box<SolveError>),
}
