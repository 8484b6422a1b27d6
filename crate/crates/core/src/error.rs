use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex count {n} is not divisible by block size {bs}")]
    Divisibility { n: usize, bs: usize },

    #[error("block size {bs} is not a multiple of the lane width {lanes}")]
    LaneWidth { bs: usize, lanes: usize },

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("block ({bi}, {bj}) is outside the {grid}x{grid} block grid")]
    BlockOutOfRange { bi: usize, bj: usize, grid: usize },

    #[error("failed to allocate {bytes} bytes of matrix storage")]
    Allocation { bytes: usize },

    #[error("invalid graph spec: {0}")]
    InvalidGraphSpec(String),

    #[error(
        "INF sentinel {inf} does not exceed the longest possible path ({max_weight} x {hops} hops)"
    )]
    SentinelTooSmall {
        inf: f32,
        max_weight: f32,
        hops: usize,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("invalid entry: {0}")]
    InvalidEntry(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("oracle limit exceeded: n = {n} > {limit}")]
    OracleLimit { n: usize, limit: usize },

    #[error("path matrix is corrupt while expanding ({i}, {j}): {msg}")]
    PathCorruption { i: usize, j: usize, msg: String },

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("worker pool: {0}")]
    Pool(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
