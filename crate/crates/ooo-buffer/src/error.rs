//! Error type shared across the crate.

use std::path::PathBuf;

/// Errors produced by dataset handling, replay, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Event timestamps violate `dt <= cst <= srect <= srest <= crt`.
    #[error("invalid event {producer_id}/{seq_id}: timestamps out of order ({detail})")]
    InvalidEvent {
        producer_id: String,
        seq_id: u64,
        detail: String,
    },

    /// Two events share a `(producer_id, seq_id)` pair.
    #[error("duplicate event {producer_id}/{seq_id}")]
    DuplicateEvent { producer_id: String, seq_id: u64 },

    /// Events were admitted out of arrival order `(srect, producer_id, seq_id)`.
    #[error("event {producer_id}/{seq_id} admitted out of arrival order (srect {srect})")]
    AdmissionOrder {
        producer_id: String,
        seq_id: u64,
        srect: i64,
    },

    /// A replay failed while admitting the event at `index`.
    #[error("replay failed at event index {index}: {source}")]
    Replay {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// An operation that needs at least one event got none.
    #[error("dataset is empty")]
    EmptyDataset,

    /// A workload spec whose schedule produces no events.
    #[error("workload produces no events: {0}")]
    EmptyWorkload(String),

    /// A malformed row in a dataset file.
    #[error("{path}: line {line}: {detail}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        detail: String,
    },

    /// Missing or unexpected header column.
    #[error("{path}: {detail}")]
    BadHeader { path: PathBuf, detail: String },

    /// Unknown synthetic preset label.
    #[error("unknown preset '{0}' (expected G-1..G-12)")]
    UnknownPreset(String),

    /// Unknown sizing algorithm name.
    #[error(
        "unknown algorithm '{0}' (expected one of sba, bstt, bsttwa, bsttd, bsttda, bskf, kslack)"
    )]
    UnknownAlgorithm(String),

    /// Unknown or malformed strategy parameter.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Malformed workload spec text.
    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),

    /// Invalid strategy or engine configuration value.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// I/O failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// CSV-level failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
