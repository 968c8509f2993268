use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a piconet needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid room dimensions {width} x {height}")]
    InvalidRoom { width: f64, height: f64 },
    #[error("node {node} at ({x}, {y}) lies outside the room")]
    OutsideRoom { node: usize, x: f64, y: f64 },
    #[error("layout is not fully connected with coverage radius {radius} after {attempts} attempts")]
    Disconnected { radius: f64, attempts: usize },
    #[error("direction undefined between coincident points")]
    CoincidentPoints,
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("link rate must be positive")]
    ZeroRate,
    #[error("average distance must be positive, got {0}")]
    NonPositiveAverageDistance(f64),
    #[error("source and destination are the same node ({0})")]
    SameEndpoints(usize),
    #[error("node id {node} out of range for {count} nodes")]
    UnknownNode { node: usize, count: usize },
    #[error("requested {requested} flows but only {available} ordered pairs exist")]
    TooManyFlows { requested: usize, available: usize },
    #[error("jain index is undefined for an all-zero throughput vector")]
    AllZeroThroughput,
    #[error("config: {key}: {message}")]
    Config { key: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
