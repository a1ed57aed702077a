use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to choose an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("malformed csv at line {line}: {msg}")]
    MalformedCsv { line: u64, msg: String },

    #[error("non-numeric price {value:?} at line {line}, column {symbol}")]
    NonNumericPrice { line: u64, symbol: String, value: String },

    #[error("non-positive price {value} at line {line}, column {symbol}")]
    NonPositivePrice { line: u64, symbol: String, value: String },

    #[error("missing price at line {line}, column {symbol}")]
    MissingPrice { line: u64, symbol: String },

    #[error("invalid date {value:?} at line {line}")]
    InvalidDate { line: u64, value: String },

    #[error("dates not strictly increasing at line {line}")]
    UnorderedDates { line: u64 },

    #[error("duplicate symbol {0}")]
    DuplicateSymbol(String),

    #[error(
        "panel too small: {dates} dates and {symbols} symbols after cleaning (need at least 2 dates and 1 symbol)"
    )]
    PanelTooSmall { dates: usize, symbols: usize },

    #[error("interval {interval} must be at least 1 and below the number of dates {n_dates}")]
    IntervalOutOfRange { interval: usize, n_dates: usize },

    #[error("stride must be at least 1")]
    InvalidStride,

    #[error("zero variance in return series of symbol {0}")]
    ZeroVariance(String),

    #[error("unknown symbol {0}")]
    UnknownSymbol(String),

    #[error("instantaneous cross-correlation needs two distinct symbols, got {0} twice")]
    SameSymbol(String),

    #[error("average cross-correlation needs at least 2 symbols, got {0}")]
    TooFewSymbols(usize),

    #[error("series too short: length {len}, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("scale {scale} out of range [{min}, {max}]")]
    ScaleOutOfRange { scale: usize, min: usize, max: usize },

    #[error("invalid scale grid: {0}")]
    InvalidScaleGrid(String),

    #[error("invalid q grid: {0}")]
    InvalidQGrid(String),

    #[error("zero window fluctuation at scale {scale} with q = {q}")]
    ZeroFluctuation { scale: usize, q: f64 },

    #[error("too few points for a power-law fit: {0} (need at least 3)")]
    TooFewPoints(usize),

    #[error("non-positive fluctuation {value} at scale {scale}")]
    NonPositiveFluctuation { scale: usize, value: f64 },

    #[error("too few scales for a crossover fit: {0} (need at least 7)")]
    TooFewScales(usize),

    #[error("moment q = {0} not present in fluctuation function")]
    UnknownMoment(f64),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),

    #[error("circulant embedding failed: eigenvalue {0} below tolerance")]
    EmbeddingFailed(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Config(_)
            | InvalidScaleGrid(_)
            | InvalidQGrid(_)
            | InvalidStride
            | IntervalOutOfRange { .. }
            | ScaleOutOfRange { .. }
            | InvalidGenerator(_)
            | UnknownMoment(_)
            | UnknownSymbol(_)
            | SameSymbol(_) => ErrorClass::Config,
            ZeroVariance(_)
            | ZeroFluctuation { .. }
            | NonPositiveFluctuation { .. }
            | NonFinite(_)
            | EmbeddingFailed(_) => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}

pub fn io_err(path: &std::path::Path, source: std::io::Error) -> Error {
    if source.kind() == std::io::ErrorKind::NotFound {
        Error::FileNotFound(path.to_path_buf())
    } else {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// An [`Error`] tagged with the pipeline stage that raised it.
#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: Error,
}

impl StageError {
    pub fn class(&self) -> ErrorClass {
        self.source.class()
    }
}

pub trait AtStage<T> {
    fn at(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}
