use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edges contain a cycle through `{0}`")]
    Cycle(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node `{0}` must have at least one state")]
    ZeroStates(String),
    #[error("node sets overlap at `{0}`")]
    Overlap(String),
    #[error("no CPT for node `{0}`")]
    MissingCpt(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid probability table: {0}")]
    InvalidTable(String),
    #[error("conditioning event has zero probability")]
    ZeroCondition,
    #[error("positivity violated: {0}")]
    Positivity(String),
    #[error("invalid probability mass: {0}")]
    InvalidMass(String),
    #[error("state {state} out of range for `{node}` ({states} states)")]
    StateOutOfRange { node: String, state: usize, states: usize },
    #[error("criterion not satisfied: {0}")]
    Criterion(String),
    #[error("no prior P(U) supplied")]
    MissingPrior,
    #[error("feasible region is empty (violation {0:.3e})")]
    Infeasible(f64),
    #[error("every start failed to converge")]
    Nonconvergence,
    #[error("bound intervals do not intersect: max lower {lb} > min upper {ub}")]
    EmptyIntersection { lb: f64, ub: f64 },
    #[error("problem too large for exact evaluation: {cells} cells (limit {limit})")]
    Scale { cells: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
