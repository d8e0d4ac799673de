use thiserror::Error;

#[derive(Debug, Error)]
pub enum GtepError {
    #[error("csv schema: {0}")]
    CsvSchema(String),

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("clustering parameters: {0}")]
    ClusterParam(String),

    #[error(
        "modified k-means infeasible: stage-1 cluster {cluster} has {size} members, fewer than k2 = {k2}"
    )]
    SubClusterTooSmall {
        cluster: usize,
        size: usize,
        k2: usize,
    },

    #[error("system file {path}: {message}")]
    SystemSchema { path: String, message: String },

    #[error("system data invalid:\n{}", diagnostics.join("\n"))]
    SystemInvalid { diagnostics: Vec<String> },

    #[error("model build: {0}")]
    ModelBuild(String),

    #[error("plan value for {name} is {value}, outside [{lower}, {upper}]")]
    PlanOutOfBounds {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("solution rejected: {0}")]
    SolutionRejected(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("io: {0}")]
    Io(String),

    #[error(transparent)]
    Solver(#[from] lpkit::LpError),
}

impl From<std::io::Error> for GtepError {
    fn from(e: std::io::Error) -> Self {
        GtepError::Io(e.to_string())
    }
}

impl From<csv::Error> for GtepError {
    fn from(e: csv::Error) -> Self {
        GtepError::Io(e.to_string())
    }
}
