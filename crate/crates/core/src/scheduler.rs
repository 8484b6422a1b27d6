//! Multi-worker blocked Floyd-Warshall.
//!
//! Each round runs as three segments separated by barriers:
//!
//! 1. worker 0 alone relaxes the diagonal block;
//! 2. all workers share one queue holding the pivot-row tasks followed by the
//!    pivot-column tasks, so a worker that runs out of row tasks moves on to
//!    column tasks without waiting for the others;
//! 3. all workers share the remaining blocks.
//!
//! Tasks are dealt round-robin by index, so the assignment of blocks to
//! workers is fixed for a given worker count. Every task in a segment writes
//! a different block and only reads blocks that nobody writes in that
//! segment, which is what makes the result independent of timing.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::{Barrier, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use crate::blocked::{check_config, raw, run_task};
use crate::error::{Error, Result};
use crate::kernel::{KernelVariant, RawMatrices};
use crate::matrix::{DistanceMatrix, PathMatrix};
use crate::plan::{BlockCoord, BlockTask, Phase};

/// Core-binding policy for worker threads. Best effort: unsupported
/// platforms or failed binds only log a warning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Pinning {
    #[default]
    None,
    /// Spread workers evenly over the available cores.
    Spread,
    /// Fill consecutive cores.
    Compact,
}

impl Pinning {
    pub fn name(self) -> &'static str {
        match self {
            Pinning::None => "none",
            Pinning::Spread => "spread",
            Pinning::Compact => "compact",
        }
    }

    fn cpu_for(self, worker: usize, workers: usize, cpus: usize) -> Option<usize> {
        match self {
            Pinning::None => None,
            Pinning::Compact => Some(worker % cpus),
            Pinning::Spread if workers < cpus => Some(worker * cpus / workers),
            Pinning::Spread => Some(worker % cpus),
        }
    }
}

impl fmt::Display for Pinning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pinning {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Pinning::None),
            "spread" | "scatter" => Ok(Pinning::Spread),
            "compact" => Ok(Pinning::Compact),
            other => Err(format!(
                "unknown pinning {other:?} (expected none, spread or compact)"
            )),
        }
    }
}

#[cfg(target_os = "linux")]
fn pin_current_thread(cpu: usize) -> bool {
    // SAFETY: cpu_set_t is plain data; CPU_SET bounds-checks the index.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_current_thread(_cpu: usize) -> bool {
    false
}

/// Worker configuration for [`fw_blocked_parallel`]. Threads are started
/// per call and live until its last round has finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkerPool {
    workers: usize,
    pinning: Pinning,
}

impl WorkerPool {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Pool("worker count must be at least 1".into()));
        }
        Ok(Self {
            workers,
            pinning: Pinning::None,
        })
    }

    pub fn with_pinning(mut self, pinning: Pinning) -> Self {
        self.pinning = pinning;
        self
    }

    /// One worker per available core.
    pub fn default_workers() -> usize {
        thread::available_parallelism().map_or(1, |n| n.get())
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn pinning(&self) -> Pinning {
        self.pinning
    }
}

impl Default for WorkerPool {
    fn default() -> Self {
        Self {
            workers: Self::default_workers(),
            pinning: Pinning::None,
        }
    }
}

/// One executed task, timed from the start of the solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub worker: usize,
    pub task: BlockTask,
    pub start: Duration,
    pub end: Duration,
}

/// Outcome of [`ScheduleTrace::check_phase_order`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseCheck {
    /// Every round ran exactly one diagonal task.
    pub single_phase1_worker: bool,
    /// No pivot-row/column task started before its round's diagonal task ended.
    pub pivots_after_phase1: bool,
    /// No remainder task started before the last pivot task of its round ended.
    pub phase4_after_pivots: bool,
    /// Every task of round k+1 started after every task of round k ended.
    pub rounds_ordered: bool,
    /// Some round had a pivot-column task start before its last pivot-row task ended.
    pub pivot_overlap: bool,
}

impl PhaseCheck {
    pub fn ordering_holds(&self) -> bool {
        self.single_phase1_worker
            && self.pivots_after_phase1
            && self.phase4_after_pivots
            && self.rounds_ordered
    }
}

#[derive(Clone, Debug)]
pub struct ScheduleTrace {
    pub workers: usize,
    pub grid: usize,
    pub events: Vec<TraceEvent>,
}

fn segment(phase: Phase) -> u8 {
    match phase {
        Phase::Diagonal => 0,
        Phase::PivotRow | Phase::PivotColumn => 1,
        Phase::Remainder => 2,
    }
}

impl ScheduleTrace {
    fn round(&self, k: usize) -> impl Iterator<Item = &TraceEvent> + '_ {
        self.events.iter().filter(move |e| e.task.round == k)
    }

    fn latest_end(&self, k: usize, phases: &[Phase]) -> Option<Duration> {
        self.round(k)
            .filter(|e| phases.contains(&e.task.phase))
            .map(|e| e.end)
            .max()
    }

    fn earliest_start(&self, k: usize, phases: &[Phase]) -> Option<Duration> {
        self.round(k)
            .filter(|e| phases.contains(&e.task.phase))
            .map(|e| e.start)
            .min()
    }

    pub fn check_phase_order(&self) -> PhaseCheck {
        use Phase::*;
        let mut check = PhaseCheck {
            single_phase1_worker: true,
            pivots_after_phase1: true,
            phase4_after_pivots: true,
            rounds_ordered: true,
            pivot_overlap: false,
        };
        for k in 0..self.grid {
            let diag: Vec<_> = self.round(k).filter(|e| e.task.phase == Diagonal).collect();
            check.single_phase1_worker &= diag.len() == 1;

            if let (Some(d_end), Some(p_start)) = (
                self.latest_end(k, &[Diagonal]),
                self.earliest_start(k, &[PivotRow, PivotColumn]),
            ) {
                check.pivots_after_phase1 &= p_start >= d_end;
            }
            if let (Some(p_end), Some(r_start)) = (
                self.latest_end(k, &[Diagonal, PivotRow, PivotColumn]),
                self.earliest_start(k, &[Remainder]),
            ) {
                check.phase4_after_pivots &= r_start >= p_end;
            }
            if let (Some(row_end), Some(col_start)) = (
                self.latest_end(k, &[PivotRow]),
                self.earliest_start(k, &[PivotColumn]),
            ) {
                check.pivot_overlap |= col_start < row_end;
            }
            if k + 1 < self.grid {
                if let (Some(end), Some(next)) = (
                    self.latest_end(k, &Phase::ALL),
                    self.earliest_start(k + 1, &Phase::ALL),
                ) {
                    check.rounds_ordered &= next >= end;
                }
            }
        }
        check
    }

    /// Verifies that tasks sharing a barrier segment write distinct blocks
    /// and never write a block another task of that segment reads.
    pub fn check_disjoint_writes(&self) -> std::result::Result<(), String> {
        for k in 0..self.grid {
            for seg in 0..3 {
                let tasks: Vec<&BlockTask> = self
                    .round(k)
                    .filter(|e| segment(e.task.phase) == seg)
                    .map(|e| &e.task)
                    .collect();
                let mut written: HashSet<BlockCoord> = HashSet::new();
                for t in &tasks {
                    if !written.insert(t.target) {
                        return Err(format!("round {k}: block {:?} written twice", t.target));
                    }
                }
                for t in &tasks {
                    for src in [t.row_src(), t.col_src()] {
                        if src != t.target && written.contains(&src) {
                            return Err(format!(
                                "round {k}: {:?} reads {src:?} while another task writes it",
                                t.target
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `x`-th value of `0..grid` with `k` removed.
#[inline]
fn skip(k: usize, x: usize) -> usize {
    x + (x >= k) as usize
}

fn pivot_task(k: usize, grid: usize, idx: usize) -> BlockTask {
    let others = grid - 1;
    let (phase, target) = if idx < others {
        (Phase::PivotRow, (k, skip(k, idx)))
    } else {
        (Phase::PivotColumn, (skip(k, idx - others), k))
    };
    BlockTask {
        round: k,
        phase,
        target,
    }
}

fn remainder_task(k: usize, grid: usize, idx: usize) -> BlockTask {
    let others = grid - 1;
    BlockTask {
        round: k,
        phase: Phase::Remainder,
        target: (skip(k, idx / others), skip(k, idx % others)),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Gate {
    Closed,
    Open,
    Abort,
}

struct Worker<'a> {
    id: usize,
    workers: usize,
    grid: usize,
    bs: usize,
    variant: KernelVariant,
    m: RawMatrices,
    barrier: &'a Barrier,
    origin: Instant,
    trace: Option<Vec<TraceEvent>>,
}

impl Worker<'_> {
    fn run(&mut self, task: BlockTask) {
        let start = self.origin.elapsed();
        // SAFETY: within a segment every task targets a distinct block and no
        // task writes a block another one reads; barriers separate segments.
        unsafe { run_task(self.m, self.bs, &task, self.variant) };
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent {
                worker: self.id,
                task,
                start,
                end: self.origin.elapsed(),
            });
        }
    }

    fn solve(&mut self) {
        let grid = self.grid;
        let others = grid - 1;
        for k in 0..grid {
            if self.id == 0 {
                self.run(BlockTask {
                    round: k,
                    phase: Phase::Diagonal,
                    target: (k, k),
                });
            }
            self.barrier.wait();
            for idx in (self.id..2 * others).step_by(self.workers) {
                self.run(pivot_task(k, grid, idx));
            }
            self.barrier.wait();
            for idx in (self.id..others * others).step_by(self.workers) {
                self.run(remainder_task(k, grid, idx));
            }
            self.barrier.wait();
        }
    }
}

fn execute(
    d: &mut DistanceMatrix,
    p: &mut PathMatrix,
    bs: usize,
    variant: KernelVariant,
    pool: &WorkerPool,
    record: bool,
) -> Result<Option<ScheduleTrace>> {
    let n = d.n();
    check_config(n, bs, variant)?;
    let m = raw(d, p);
    let grid = n / bs;
    let workers = pool.workers;
    let barrier = Barrier::new(workers);
    let gate = (Mutex::new(Gate::Closed), Condvar::new());
    let cpus = WorkerPool::default_workers();
    let origin = Instant::now();

    if pool.pinning != Pinning::None && cfg!(not(target_os = "linux")) {
        log::warn!("core pinning is not supported on this platform; ignoring");
    }

    let outcome = thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        let mut spawn_error = None;
        for id in 0..workers {
            let mut worker = Worker {
                id,
                workers,
                grid,
                bs,
                variant,
                m,
                barrier: &barrier,
                origin,
                trace: record.then(Vec::new),
            };
            let gate = &gate;
            let pinning = pool.pinning;
            let spawned = thread::Builder::new()
                .name(format!("apsp-worker-{id}"))
                .spawn_scoped(scope, move || {
                    if let Some(cpu) = pinning.cpu_for(id, workers, cpus) {
                        if cfg!(target_os = "linux") && !pin_current_thread(cpu) {
                            log::warn!("could not pin worker {id} to cpu {cpu}");
                        }
                    }
                    let (lock, cvar) = gate;
                    let state = cvar
                        .wait_while(lock.lock().unwrap(), |g| *g == Gate::Closed)
                        .unwrap();
                    if *state == Gate::Abort {
                        return Vec::new();
                    }
                    drop(state);
                    worker.solve();
                    worker.trace.unwrap_or_default()
                });
            match spawned {
                Ok(h) => handles.push(h),
                Err(e) => {
                    spawn_error = Some(e);
                    break;
                }
            }
        }
        {
            let (lock, cvar) = &gate;
            *lock.lock().unwrap() = if spawn_error.is_some() {
                Gate::Abort
            } else {
                Gate::Open
            };
            cvar.notify_all();
        }
        let mut events = Vec::new();
        for h in handles {
            match h.join() {
                Ok(ev) => events.extend(ev),
                Err(panic) => std::panic::resume_unwind(panic),
            }
        }
        match spawn_error {
            Some(e) => Err(Error::Pool(format!("failed to start worker thread: {e}"))),
            None => Ok(events),
        }
    })?;

    Ok(record.then(|| {
        let mut events = outcome;
        events.sort_by_key(|e| (e.start, e.worker));
        ScheduleTrace {
            workers,
            grid,
            events,
        }
    }))
}

/// Solves `d` in place with `pool.workers()` threads. Distances and paths
/// are bitwise identical to [`crate::blocked::fw_blocked_serial`] with the
/// same block size and kernel.
pub fn fw_blocked_parallel(
    d: &mut DistanceMatrix,
    p: &mut PathMatrix,
    bs: usize,
    variant: KernelVariant,
    pool: &WorkerPool,
) -> Result<()> {
    execute(d, p, bs, variant, pool, false).map(|_| ())
}

/// Like [`fw_blocked_parallel`], additionally recording when and where each
/// block task ran.
pub fn fw_blocked_parallel_traced(
    d: &mut DistanceMatrix,
    p: &mut PathMatrix,
    bs: usize,
    variant: KernelVariant,
    pool: &WorkerPool,
) -> Result<ScheduleTrace> {
    execute(d, p, bs, variant, pool, true).map(|t| t.expect("trace was requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocked::fw_blocked_serial;
    use crate::generate::{generate_graph, GraphSpec};
    use crate::plan::RoundPhasePlan;

    #[test]
    fn index_mapping_matches_plan() {
        for grid in 2..7 {
            for k in 0..grid {
                let plan = RoundPhasePlan::new(k, grid);
                let pivots: Vec<_> = (0..2 * (grid - 1))
                    .map(|i| pivot_task(k, grid, i))
                    .collect();
                assert_eq!(pivots, plan.pivot_tasks());
                let rest: Vec<_> = (0..(grid - 1) * (grid - 1))
                    .map(|i| remainder_task(k, grid, i))
                    .collect();
                assert_eq!(rest, plan.tasks(Phase::Remainder));
            }
        }
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(matches!(WorkerPool::new(0), Err(Error::Pool(_))));
    }

    #[test]
    fn single_worker_matches_serial() {
        let g = generate_graph(&GraphSpec::new(128, 0.05, (1, 100), 3)).unwrap();
        let (mut ds, mut ps) = (g.clone(), PathMatrix::new(128).unwrap());
        fw_blocked_serial(&mut ds, &mut ps, 32, KernelVariant::Lanes).unwrap();
        let (mut dp, mut pp) = (g, PathMatrix::new(128).unwrap());
        let trace = fw_blocked_parallel_traced(
            &mut dp,
            &mut pp,
            32,
            KernelVariant::Lanes,
            &WorkerPool::new(1).unwrap(),
        )
        .unwrap();
        assert_eq!(ds, dp);
        assert_eq!(ps, pp);

        // Same order as the serial driver.
        let serial_order: Vec<BlockTask> = (0..4)
            .flat_map(|k| {
                let plan = RoundPhasePlan::new(k, 4);
                Phase::ALL.into_iter().flat_map(move |ph| plan.tasks(ph))
            })
            .collect();
        let traced: Vec<BlockTask> = trace.events.iter().map(|e| e.task).collect();
        assert_eq!(traced, serial_order);
    }

    #[test]
    fn single_block_grid() {
        let g = generate_graph(&GraphSpec::new(32, 0.2, (1, 9), 8)).unwrap();
        let (mut ds, mut ps) = (g.clone(), PathMatrix::new(32).unwrap());
        fw_blocked_serial(&mut ds, &mut ps, 32, KernelVariant::Scalar).unwrap();
        let (mut dp, mut pp) = (g, PathMatrix::new(32).unwrap());
        let pool = WorkerPool::new(3).unwrap();
        let trace =
            fw_blocked_parallel_traced(&mut dp, &mut pp, 32, KernelVariant::Scalar, &pool).unwrap();
        assert_eq!((ds, ps), (dp, pp));
        assert_eq!(trace.events.len(), 1);
    }

    #[test]
    fn more_workers_than_tasks() {
        let g = generate_graph(&GraphSpec::new(64, 0.1, (1, 50), 2)).unwrap();
        let (mut ds, mut ps) = (g.clone(), PathMatrix::new(64).unwrap());
        fw_blocked_serial(&mut ds, &mut ps, 32, KernelVariant::Lanes).unwrap();
        let (mut dp, mut pp) = (g, PathMatrix::new(64).unwrap());
        let pool = WorkerPool::new(9).unwrap().with_pinning(Pinning::Spread);
        let trace =
            fw_blocked_parallel_traced(&mut dp, &mut pp, 32, KernelVariant::Lanes, &pool).unwrap();
        assert_eq!(ds, dp);
        assert_eq!(ps, pp);
        assert!(trace.check_phase_order().ordering_holds());
        trace.check_disjoint_writes().unwrap();
    }

    #[test]
    fn disjointness_checker_catches_conflicts() {
        let ev = |target, phase| TraceEvent {
            worker: 0,
            task: BlockTask {
                round: 0,
                phase,
                target,
            },
            start: Duration::ZERO,
            end: Duration::ZERO,
        };
        let trace = ScheduleTrace {
            workers: 2,
            grid: 3,
            events: vec![ev((1, 1), Phase::Remainder), ev((1, 1), Phase::Remainder)],
        };
        assert!(trace.check_disjoint_writes().is_err());
        // A remainder task writing a block that another remainder task reads.
        let trace = ScheduleTrace {
            workers: 2,
            grid: 3,
            events: vec![ev((1, 0), Phase::Remainder), ev((1, 2), Phase::Remainder)],
        };
        assert!(trace.check_disjoint_writes().is_err());
    }

    #[test]
    fn pinning_targets() {
        assert_eq!(Pinning::Compact.cpu_for(5, 8, 4), Some(1));
        assert_eq!(Pinning::Spread.cpu_for(1, 2, 8), Some(4));
        assert_eq!(Pinning::None.cpu_for(1, 2, 8), None);
        assert_eq!("scatter".parse::<Pinning>().unwrap(), Pinning::Spread);
    }
}
