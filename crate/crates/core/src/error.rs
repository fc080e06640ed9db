use thiserror::Error;

use crate::metric::{AxiomViolation, Point};

/// Errors raised by the testbed. Input problems, oracle refusals and I/O are
/// kept in separate variants so callers (the CLI in particular) can map them
/// onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("distance matrix has a negative entry {value} at ({i}, {j})")]
    NegativeEntry { i: usize, j: usize, value: i64 },
    #[error("point count {0} is outside the supported range 2..=16")]
    PointCount(usize),
    #[error("metric axioms violated: {}", describe_violations(.0))]
    NotAMetric(Vec<AxiomViolation>),
    #[error("point {point} is out of range for a metric with {n} points")]
    PointOutOfRange { point: Point, n: usize },
    #[error("configuration repeats point {0}")]
    DuplicatePoint(Point),
    #[error("configuration has {got} points, expected k = {expected}")]
    WrongSize { expected: usize, got: usize },
    #[error("k exceeds n (k = {k}, n = {n})")]
    KExceedsN { k: usize, n: usize },
    #[error("k must be at least 1")]
    ZeroServers,
    #[error("the anchor construction needs k >= 2 (minimum pairwise distance is undefined for k = 1)")]
    SingleServer,
    #[error("labels: expected {expected} names, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("work vectors live on different configuration spaces")]
    DomainMismatch,
    #[error("brute-force oracle refused: k^|rho| = {k}^{len} exceeds the guard of {guard}")]
    OracleGuard { k: usize, len: usize, guard: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn describe_violations(violations: &[AxiomViolation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
