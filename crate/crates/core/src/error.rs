use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("cannot parse rational {text:?}: {reason}")]
    Rational { text: String, reason: String },

    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),

    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(String),

    #[error("duplicate transition {0} -> {1}")]
    DuplicateTransition(String, String),

    #[error("unknown edge in constraint: {0} -> {1}")]
    UnknownConstraintEdge(String, String),

    #[error("invalid interval: {0}")]
    Interval(String),

    #[error("invalid transition {from} -> {to}: {reason}")]
    Transition {
        from: String,
        to: String,
        reason: String,
    },

    #[error("invalid query: {0}")]
    Query(String),

    #[error("invalid Markov chain: {0}")]
    Chain(String),

    #[error("vertex sets differ between chain and model")]
    VertexMismatch,

    #[error("model not fully determined")]
    NotDetermined,

    #[error("model is invalid: {0}")]
    InvalidModel(String),

    #[error("structure is not epsilon-known")]
    NotEpsilonKnown,

    #[error("no slack edge for row {0:?}")]
    NoSlackEdge(String),

    #[error("grid too large: {cardinality} grid chains exceed the budget of {budget}")]
    GridTooLarge { cardinality: u128, budget: u128 },

    #[error("missing promise gap (epsilon) in query")]
    MissingPromiseGap,

    #[error("qualitative threshold must be 0 or 1, got {0}")]
    NonQualitativeThreshold(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("missing value for variable {0:?}")]
    MissingVariable(String),

    #[error("solver launch failed: {0}")]
    SolverLaunch(String),

    #[error("invalid solver command: {0}")]
    SolverCommand(String),

    #[error("no feasible refinement found: {0}")]
    NoRefinement(String),

    #[error("invalid CNF: {0}")]
    Cnf(String),

    #[error("invalid gadget parameters: {0}")]
    GadgetParams(String),

    #[error("transformed threshold {threshold} lies outside [0,1]; instance is trivially {}", if *.trivially_true { "true" } else { "false" })]
    TrivialThreshold {
        threshold: String,
        trivially_true: bool,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
