use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Domain errors. Every variant has a stable machine-readable [`code`](Error::code).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown letter {0:?} for basis of rank {1}")]
    UnknownLetter(String, usize),
    #[error("invalid rank {0}")]
    InvalidRank(usize),
    #[error("basis mismatch: rank {0} vs rank {1}")]
    BasisMismatch(usize, usize),
    #[error("empty word where a nonempty word is required")]
    EmptyWord,
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph is not folded at vertex {0}")]
    NotFolded(usize),
    #[error("graph is not a core graph: vertex {0} has degree {1}")]
    NotCore(usize, usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("bridge is not embedded: {0}")]
    InvalidBridge(String),
    #[error("coset {} has finite index", .0 + 1)]
    FiniteIndex(usize),
    #[error("search depth {0} exhausted")]
    DepthExhausted(usize),
    #[error("power bound is unbounded for coset {}", .0 + 1)]
    Unbounded(usize),
    #[error("map is not invertible")]
    NotInvertible,
    #[error("map is not an automorphism")]
    NotAutomorphism,
    #[error("operation requires a rose domain")]
    NotRose,
    #[error("map is not a train track map up to iterate {0}")]
    NotTrainTrack(usize),
    #[error("no power up to {0} crosses every edge")]
    NoCrossingPower(usize),
    #[error("invalid graph map: {0}")]
    InvalidMap(String),
    #[error("invalid marking: {0}")]
    InvalidMarking(String),
    #[error("edge lengths and scale factors must be positive")]
    NonPositiveLength,
    #[error("segment too short for quasiperiodicity window")]
    InsufficientDepth,
    #[error("frequency vectors use different windows or bases")]
    WindowMismatch,
    #[error("connectors do not give a cyclically reduced witness")]
    InvalidConnectors,
    #[error("no connectors of length <= {0} found")]
    ConnectorSearchExhausted(usize),
    #[error("relator must be nontrivial")]
    TrivialRelator,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownLetter(..) => "unknown-letter",
            Error::InvalidRank(_) => "invalid-rank",
            Error::BasisMismatch(..) => "basis-mismatch",
            Error::EmptyWord => "empty-word",
            Error::Parse { .. } => "parse",
            Error::NotFolded(_) => "not-folded",
            Error::NotCore(..) => "not-core",
            Error::Disconnected => "disconnected",
            Error::InvalidBridge(_) => "invalid-bridge",
            Error::FiniteIndex(_) => "finite-index",
            Error::DepthExhausted(_) => "depth-exhausted",
            Error::Unbounded(_) => "unbounded",
            Error::NotInvertible => "not-invertible",
            Error::NotAutomorphism => "not-automorphism",
            Error::NotRose => "not-rose",
            Error::NotTrainTrack(_) => "not-train-track",
            Error::NoCrossingPower(_) => "no-crossing-power",
            Error::InvalidMap(_) => "invalid-map",
            Error::InvalidMarking(_) => "invalid-marking",
            Error::NonPositiveLength => "nonpositive-length",
            Error::InsufficientDepth => "insufficient-depth",
            Error::WindowMismatch => "window-mismatch",
            Error::InvalidConnectors => "invalid-connectors",
            Error::ConnectorSearchExhausted(_) => "connector-search-exhausted",
            Error::TrivialRelator => "trivial-relator",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
