use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("demand has no positive weight")]
    EmptyDemand,
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("negative or non-finite weight {weight} on ({src},{dst})")]
    BadWeight { src: usize, dst: usize, weight: f64 },
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("duplicate pair ({0},{1})")]
    DuplicatePair(usize, usize),
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("node {0} has no probability mass in the requested direction")]
    NoMass(usize),
    #[error("logarithm base must be > 1, got {0}")]
    BadBase(f64),
    #[error("arity must be >= 2, got {0}")]
    BadArity(usize),
    #[error("item {0} is not in the tree")]
    ItemNotInTree(usize),
    #[error("node count mismatch: demand has {demand}, graph has {graph}")]
    ShapeMismatch { demand: usize, graph: usize },
    #[error("graph is not connected")]
    NotConnected,
    #[error("demand is not in the required family: {0}")]
    WrongFamily(String),
    #[error("instance too large: n = {n} exceeds limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("invalid generator spec: {0}")]
    BadSpec(String),
    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyDemand => "EmptyDemand",
            Error::SelfLoop(_) => "SelfLoop",
            Error::BadWeight { .. } => "BadWeight",
            Error::NodeOutOfRange { .. } => "NodeOutOfRange",
            Error::DuplicatePair(..) => "DuplicatePair",
            Error::NotNormalized(_) => "NotNormalized",
            Error::NoMass(_) => "NoMass",
            Error::BadBase(_) => "BadBase",
            Error::BadArity(_) => "BadArity",
            Error::ItemNotInTree(_) => "ItemNotInTree",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::NotConnected => "NotConnected",
            Error::WrongFamily(_) => "WrongFamily",
            Error::TooLarge { .. } => "TooLarge",
            Error::BadSpec(_) => "BadSpec",
            Error::Format(_) => "Format",
        }
    }
}
