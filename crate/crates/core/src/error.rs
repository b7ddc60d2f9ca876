use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid variable name {0:?}: names must be non-empty and contain no whitespace or commas")]
    InvalidName(String),

    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),

    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(String),

    #[error("self-loop on {0:?}")]
    SelfLoop(String),

    #[error("graph contains a directed cycle")]
    Cyclic,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0:?} appears both as an endpoint and in the conditioning set")]
    Overlap(String),

    #[error("exposure and outcome must be distinct (got {0:?} twice)")]
    SameVertex(String),

    #[error("graphs are not over the same vertex set")]
    VertexSetMismatch,

    #[error("shared topological order assumed but the difference graph is cyclic")]
    CyclicUnderSharedOrder,

    #[error("exhaustive enumeration is capped at {cap} vertices (graph has {n})")]
    TooManyVertices { n: usize, cap: usize },

    #[error("positivity violated: no rows with {exposure}={value} in stratum {stratum}")]
    Positivity {
        exposure: String,
        value: u32,
        stratum: String,
    },

    #[error("singular design: column {0:?} is collinear with the other regressors")]
    SingularDesign(String),

    #[error("need more than {needed} rows for this regression, got {got}")]
    InsufficientRows { needed: usize, got: usize },

    #[error("unknown identification strategy {0:?}")]
    UnknownStrategy(String),

    #[error("effect is not identifiable; nothing to estimate")]
    NotIdentifiable,

    #[error("dataset error: {0}")]
    Data(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
