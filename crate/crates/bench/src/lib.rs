//! Benchmark harness for the blocked Floyd-Warshall solvers: seeded inputs,
//! median-of-reps timing, verification against the naive solver, and
//! CSV/table reports for variant ladders and block-size or worker sweeps.
//!
//! Performance is reported as `2 n^3 / (t * 1e9)` GFLOPS (one add and one
//! compare per inner iteration) for every variant.

pub mod config;
pub mod error;
pub mod harness;
pub mod report;

pub use config::{RunConfig, Variant, DEFAULT_N, DEFAULT_VERIFY_CAP};
pub use error::{BenchError, Result};
pub use harness::{
    flop_count, gflops, median, run, run_ladder, run_on, run_with, sweep_block_size, sweep_workers,
    BenchRecord, Mismatch, SweepOutcome, Timer, Verification, WallClock, Workload,
};
pub use report::{emit_csv, emit_table, parse_csv, write_csv, CsvRow, CSV_HEADER};
