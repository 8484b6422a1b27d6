//! Round and phase decomposition of the blocked algorithm.
//!
//! Round `k` of an `R x R` block grid updates the diagonal block `(k, k)`,
//! then the rest of block row `k` and block column `k`, then every remaining
//! block. Each target block `(i, j)` is relaxed against the pivot-column block
//! `(i, k)` and the pivot-row block `(k, j)`; in the first three phases the
//! target is one of its own sources.

use std::fmt;

/// Block coordinates `(block_row, block_col)`.
pub type BlockCoord = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Diagonal = 1,
    PivotRow = 2,
    PivotColumn = 3,
    Remainder = 4,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::Diagonal,
        Phase::PivotRow,
        Phase::PivotColumn,
        Phase::Remainder,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phase {}", self.number())
    }
}

/// One unit of work: relax `target` through the pivots of round `round`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockTask {
    pub round: usize,
    pub phase: Phase,
    pub target: BlockCoord,
}

impl BlockTask {
    pub fn row_src(&self) -> BlockCoord {
        (self.target.0, self.round)
    }

    pub fn col_src(&self) -> BlockCoord {
        (self.round, self.target.1)
    }
}

/// The blocks a given phase of round `k` updates on an `grid x grid` block
/// grid, in row-major order. Every block appears in exactly one phase.
pub fn partition_blocks(phase: Phase, k: usize, grid: usize) -> Vec<BlockCoord> {
    assert!(k < grid, "round {k} outside a {grid}-block grid");
    match phase {
        Phase::Diagonal => vec![(k, k)],
        Phase::PivotRow => (0..grid).filter(|&j| j != k).map(|j| (k, j)).collect(),
        Phase::PivotColumn => (0..grid).filter(|&i| i != k).map(|i| (i, k)).collect(),
        Phase::Remainder => (0..grid)
            .filter(|&i| i != k)
            .flat_map(|i| (0..grid).filter(|&j| j != k).map(move |j| (i, j)))
            .collect(),
    }
}

/// All four phases of one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundPhasePlan {
    pub round: usize,
    pub grid: usize,
    pub phase1: BlockCoord,
    pub phase2: Vec<BlockCoord>,
    pub phase3: Vec<BlockCoord>,
    pub phase4: Vec<BlockCoord>,
}

impl RoundPhasePlan {
    pub fn new(round: usize, grid: usize) -> Self {
        Self {
            round,
            grid,
            phase1: (round, round),
            phase2: partition_blocks(Phase::PivotRow, round, grid),
            phase3: partition_blocks(Phase::PivotColumn, round, grid),
            phase4: partition_blocks(Phase::Remainder, round, grid),
        }
    }

    pub fn tasks(&self, phase: Phase) -> Vec<BlockTask> {
        let coords = match phase {
            Phase::Diagonal => std::slice::from_ref(&self.phase1),
            Phase::PivotRow => &self.phase2[..],
            Phase::PivotColumn => &self.phase3[..],
            Phase::Remainder => &self.phase4[..],
        };
        coords
            .iter()
            .map(|&target| BlockTask {
                round: self.round,
                phase,
                target,
            })
            .collect()
    }

    /// Phase-2 tasks followed by phase-3 tasks; both only depend on phase 1.
    pub fn pivot_tasks(&self) -> Vec<BlockTask> {
        let mut tasks = self.tasks(Phase::PivotRow);
        tasks.extend(self.tasks(Phase::PivotColumn));
        tasks
    }

    /// Block tasks in this round across all phases.
    pub fn task_count(&self) -> usize {
        1 + self.phase2.len() + self.phase3.len() + self.phase4.len()
    }
}

/// Bytes touched by one remainder-phase task: the target, its two source
/// distance blocks and the target path block, all with 4-byte elements.
pub fn phase4_working_set_bytes(bs: usize) -> usize {
    4 * bs * bs * 4
}
