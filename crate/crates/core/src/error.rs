use thiserror::Error;

/// Errors from the compositional geometry primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodaError {
    #[error("composition needs at least 2 parts, got {0}")]
    EmptyVector(usize),
    #[error("part {index} is not strictly positive ({value})")]
    NonPositivePart { index: usize, value: f64 },
    #[error("closure constant must be positive and finite, got {0}")]
    InvalidClosure(f64),
    #[error("parts sum to {sum}, expected {k}")]
    NotClosed { sum: f64, k: f64 },
    #[error("zero-replacement delta must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("every component is zero")]
    AllZero,
    #[error("component {index} is negative or not finite ({value})")]
    NegativeComponent { index: usize, value: f64 },
    #[error("clr coordinates are not centered (sum = {0})")]
    NotCentered(f64),
    #[error("dimension mismatch: {left} vs {right} parts")]
    DimensionMismatch { left: usize, right: usize },
}

/// Errors raised while reading population tables.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("row {row}: cannot parse {column} value {value:?}")]
    UnparsableValue { row: usize, column: String, value: String },
    #[error("row {row}: unrecognized age group label {label:?}")]
    UnknownAgeLabel { row: usize, label: String },
    #[error("row {row}: duplicate row for {key}")]
    DuplicateRow { row: usize, key: String },
    #[error("{key}: missing age bins {missing:?}")]
    MissingBin { key: String, missing: Vec<String> },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("row {row}: year {year} outside 1950-2100")]
    YearOutOfRange { row: usize, year: i32 },
    #[error("{key}: every age bin is zero")]
    AllZeroPyramid { key: String },
    #[error("table has no data")]
    Empty,
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Coda(#[from] CodaError),
}

/// Errors from the similarity ranking.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpitomeError {
    #[error("no World pyramid for year {0}")]
    MissingWorldPyramid(i32),
    #[error("entity {id} has no pyramid for reference year {year}")]
    MissingReference { id: u32, year: i32 },
    #[error("no {0} entities available")]
    EmptySection(String),
    #[error(transparent)]
    Coda(#[from] CodaError),
}

/// Errors from hierarchical clustering.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("need at least 2 observations to build a dendrogram, got {0}")]
    DegenerateMatrix(usize),
    #[error("cluster count {k} out of range 1..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("cluster {0} has no members with a composition")]
    EmptyCluster(usize),
    #[error("distance matrix is malformed: {0}")]
    MalformedMatrix(String),
    #[error(transparent)]
    Coda(#[from] CodaError),
}
