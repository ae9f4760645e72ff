use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circulant seed (n={n}, k={k}): {reason}")]
    InvalidSeed { n: usize, k: usize, reason: String },

    #[error("circulant seed (n={n}, k={k}) has rank {rank}, expected full rank {expected}")]
    RankDeficientSeed {
        n: usize,
        k: usize,
        rank: usize,
        expected: usize,
    },

    #[error("Bacon-Shor lattice side must be at least 2, got {0}")]
    BaconShorTooSmall(usize),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("no disjoint representative partition for logical {logical} ({basis}): {reason}")]
    PartitionNotFound {
        logical: usize,
        basis: char,
        reason: String,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("detector {0} is not deterministic in the noiseless circuit")]
    NonDeterministicDetector(usize),

    #[error("observable {0} is not deterministic in the noiseless circuit")]
    NonDeterministicObservable(usize),

    #[error("location {0} is not a noise instruction")]
    NotANoiseLocation(usize),

    #[error("syndrome is not in the column space of the detector error model")]
    SingularSyndrome,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("per-round normalization undefined for p_L = {0}")]
    NormalizationUndefined(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
