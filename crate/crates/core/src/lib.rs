//! All-pairs shortest paths by blocked Floyd-Warshall.
//!
//! The distance matrix is split into `bs x bs` blocks and solved in
//! `n / bs` rounds. Each round relaxes the diagonal block, then the rest of
//! its block row and block column, then everything else. The per-block
//! kernel comes in a plain conditional form and an explicit 16-lane
//! branchless form, and rounds can be executed by a pool of workers that
//! respects the phase dependencies.
//!
//! ```
//! use apsp_core::{fw_blocked_serial, generate_graph, ApspResult, GraphSpec, KernelVariant, PathMatrix};
//!
//! let graph = generate_graph(&GraphSpec::new(64, 0.1, (1, 100), 7)).unwrap();
//! let naive = ApspResult::naive(graph.clone()).unwrap();
//!
//! let mut d = graph;
//! let mut p = PathMatrix::new(64).unwrap();
//! fw_blocked_serial(&mut d, &mut p, 16, KernelVariant::Lanes).unwrap();
//! assert_eq!(d, naive.distances);
//! ```

pub mod blocked;
pub mod error;
pub mod generate;
pub mod io;
pub mod kernel;
pub mod matrix;
pub mod plan;
pub mod reference;
pub mod scheduler;

pub use blocked::{check_config, fw_block, fw_blocked_serial};
pub use error::{Error, Result};
pub use generate::{generate_graph, GraphSpec};
pub use io::{read_matrix, read_path_matrix, write_matrix, write_path_matrix};
pub use kernel::{KernelVariant, LANES};
pub use matrix::{
    allocate_matrices, validate_sentinel, BlockRegion, DistanceMatrix, PathMatrix, ALIGN, INF,
    NO_INTERMEDIATE,
};
pub use plan::{partition_blocks, phase4_working_set_bytes, BlockTask, Phase, RoundPhasePlan};
pub use reference::{
    brute_force_oracle, enumerate_simple_paths, fw_naive, min_plus_squaring, reconstruct_path,
    ApspResult,
};
pub use scheduler::{
    fw_blocked_parallel, fw_blocked_parallel_traced, PhaseCheck, Pinning, ScheduleTrace,
    TraceEvent, WorkerPool,
};
