//! Timing, verification and sweeps.
//!
//! Only the solve itself is timed. Graph generation, matrix cloning and the
//! naive reference run all happen outside the [`Timer`].

use std::fmt;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use apsp_core::{
    fw_blocked_parallel, fw_blocked_serial, fw_naive, generate_graph, validate_sentinel,
    DistanceMatrix, KernelVariant, PathMatrix,
};

use crate::config::{RunConfig, Variant};
use crate::error::{BenchError, Result};

/// Measures one execution of `work`, in seconds.
pub trait Timer {
    fn time(&mut self, work: &mut dyn FnMut()) -> f64;
}

/// Monotonic wall-clock timer.
#[derive(Clone, Copy, Debug, Default)]
pub struct WallClock;

impl Timer for WallClock {
    fn time(&mut self, work: &mut dyn FnMut()) -> f64 {
        let start = Instant::now();
        work();
        start.elapsed().as_secs_f64()
    }
}

/// Operations per solve: one add and one compare per inner iteration.
pub fn flop_count(n: usize) -> f64 {
    2.0 * (n as f64).powi(3)
}

pub fn gflops(n: usize, seconds: f64) -> f64 {
    flop_count(n) / (seconds * 1e9)
}

/// Median of a non-empty sample; the mean of the two middle values for
/// even sizes.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of an empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verification {
    Pass,
    Fail,
    Skipped,
}

impl Verification {
    pub fn name(self) -> &'static str {
        match self {
            Verification::Pass => "pass",
            Verification::Fail => "fail",
            Verification::Skipped => "skipped",
        }
    }
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// First cell where a solver disagrees with the naive reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mismatch {
    pub i: usize,
    pub j: usize,
    pub expected: f32,
    pub actual: f32,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "first difference at ({}, {}): expected {}, got {}",
            self.i, self.j, self.expected, self.actual
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub config: RunConfig,
    /// Median solve time over `config.reps`.
    pub wall_time_s: f64,
    pub gflops: f64,
    pub verified: Verification,
    pub mismatch: Option<Mismatch>,
    /// Seconds since the Unix epoch when the record was produced.
    pub timestamp: u64,
}

/// An input graph plus its lazily computed naive solution.
pub struct Workload {
    graph: DistanceMatrix,
    reference: Option<DistanceMatrix>,
}

impl Workload {
    pub fn generate(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self::from_graph(generate_graph(&config.graph_spec())?))
    }

    pub fn from_graph(graph: DistanceMatrix) -> Self {
        Self {
            graph,
            reference: None,
        }
    }

    pub fn graph(&self) -> &DistanceMatrix {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    fn reference(&mut self) -> Result<&DistanceMatrix> {
        if self.reference.is_none() {
            let mut d = self.graph.clone();
            let mut p = PathMatrix::new(d.n())?;
            fw_naive(&mut d, &mut p);
            self.reference = Some(d);
        }
        Ok(self.reference.as_ref().unwrap())
    }
}

/// Solves `d` in place with the configured variant.
pub fn solve(config: &RunConfig, d: &mut DistanceMatrix, p: &mut PathMatrix) -> Result<()> {
    match config.variant {
        Variant::Naive => fw_naive(d, p),
        Variant::BlockedSerial => fw_blocked_serial(d, p, config.bs, config.kernel)?,
        Variant::BlockedParallel => {
            fw_blocked_parallel(d, p, config.bs, config.kernel, &config.pool()?)?
        }
    }
    Ok(())
}

fn now_epoch() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Runs `config` on `workload` and returns the record with the final
/// distance matrix. `after_solve` sees each solved matrix before it is
/// verified.
pub fn run_on(
    config: &RunConfig,
    workload: &mut Workload,
    timer: &mut dyn Timer,
    after_solve: &dyn Fn(&mut DistanceMatrix),
) -> Result<(BenchRecord, DistanceMatrix)> {
    let config = RunConfig {
        n: workload.n(),
        ..config.clone()
    };
    if config.variant.is_blocked() {
        apsp_core::check_config(config.n, config.bs, config.kernel)
            .map_err(|e| BenchError::Config(e.to_string()))?;
    }
    if config.reps == 0 {
        return Err(BenchError::Config("reps must be at least 1".into()));
    }
    if let Some(w) = workload.graph.max_weight() {
        validate_sentinel(w, config.n).map_err(|e| BenchError::Config(e.to_string()))?;
    }
    let mut times = Vec::with_capacity(config.reps);
    let mut last = None;
    for _ in 0..config.reps {
        let mut d = workload.graph.clone();
        let mut p = PathMatrix::new(d.n())?;
        let mut outcome = Ok(());
        let secs = timer.time(&mut || outcome = solve(&config, &mut d, &mut p));
        outcome?;
        times.push(secs);
        after_solve(&mut d);
        last = Some(d);
    }
    let distances = last.expect("at least one rep");

    let (verified, mismatch) = if config.will_verify() {
        match distances.first_difference(workload.reference()?) {
            None => (Verification::Pass, None),
            Some((i, j, actual, expected)) => (
                Verification::Fail,
                Some(Mismatch {
                    i,
                    j,
                    expected,
                    actual,
                }),
            ),
        }
    } else {
        if config.verify {
            log::warn!(
                "n = {} exceeds the verification cap {}; skipping verification",
                config.n,
                config.verify_cap
            );
        }
        (Verification::Skipped, None)
    };

    let wall_time_s = median(&times);
    let record = BenchRecord {
        gflops: gflops(config.n, wall_time_s),
        config,
        wall_time_s,
        verified,
        mismatch,
        timestamp: now_epoch(),
    };
    Ok((record, distances))
}

pub fn run_with(config: &RunConfig, timer: &mut dyn Timer) -> Result<BenchRecord> {
    let mut workload = Workload::generate(config)?;
    run_on(config, &mut workload, timer, &|_| {}).map(|(r, _)| r)
}

/// Generates the configured graph, times the solve and verifies it.
pub fn run(config: &RunConfig) -> Result<BenchRecord> {
    run_with(config, &mut WallClock)
}

/// Records from a sweep, plus the entries that could not run.
#[derive(Debug)]
pub struct SweepOutcome {
    pub records: Vec<BenchRecord>,
    pub failures: Vec<(usize, BenchError)>,
    /// All successful entries produced bitwise-identical distances.
    pub distances_agree: bool,
}

fn sweep(
    base: &RunConfig,
    values: &[usize],
    timer: &mut dyn Timer,
    apply: impl Fn(&RunConfig, usize) -> RunConfig,
    workload: Option<&mut Workload>,
) -> Result<SweepOutcome> {
    if values.is_empty() {
        return Err(BenchError::Config("sweep list is empty".into()));
    }
    let mut owned;
    let workload = match workload {
        Some(w) => w,
        None => {
            base.graph_spec().validate()?;
            owned = Workload::from_graph(generate_graph(&base.graph_spec())?);
            &mut owned
        }
    };
    let mut out = SweepOutcome {
        records: Vec::new(),
        failures: Vec::new(),
        distances_agree: true,
    };
    let mut first: Option<DistanceMatrix> = None;
    for &v in values {
        let cfg = apply(base, v);
        match cfg
            .validate()
            .and_then(|_| run_on(&cfg, workload, timer, &|_| {}))
        {
            Ok((record, d)) => {
                match &first {
                    Some(f) => out.distances_agree &= *f == d,
                    None => first = Some(d),
                }
                out.records.push(record);
            }
            Err(e) => out.failures.push((v, e)),
        }
    }
    Ok(out)
}

/// One record per block size on the same graph. Block sizes that do not fit
/// `n` (or the kernel's lane width) are reported in `failures`.
pub fn sweep_block_size(
    base: &RunConfig,
    bs_list: &[usize],
    timer: &mut dyn Timer,
    workload: Option<&mut Workload>,
) -> Result<SweepOutcome> {
    sweep(
        base,
        bs_list,
        timer,
        |c, bs| RunConfig { bs, ..c.clone() },
        workload,
    )
}

/// One blocked-parallel record per worker count on the same graph.
pub fn sweep_workers(
    base: &RunConfig,
    worker_list: &[usize],
    timer: &mut dyn Timer,
    workload: Option<&mut Workload>,
) -> Result<SweepOutcome> {
    sweep(
        base,
        worker_list,
        timer,
        |c, workers| RunConfig {
            workers,
            variant: Variant::BlockedParallel,
            ..c.clone()
        },
        workload,
    )
}

/// The optimization ladder: naive, blocked with each kernel, then parallel.
pub fn ladder_configs(base: &RunConfig) -> Vec<RunConfig> {
    let with = |variant, kernel| RunConfig {
        variant,
        kernel,
        ..base.clone()
    };
    vec![
        with(Variant::Naive, KernelVariant::Scalar),
        with(Variant::BlockedSerial, KernelVariant::Scalar),
        with(Variant::BlockedSerial, KernelVariant::Lanes),
        with(Variant::BlockedParallel, KernelVariant::Lanes),
    ]
}

pub fn run_ladder(
    base: &RunConfig,
    timer: &mut dyn Timer,
    workload: Option<&mut Workload>,
) -> Result<Vec<BenchRecord>> {
    let mut owned;
    let workload = match workload {
        Some(w) => w,
        None => {
            owned = Workload::generate(base)?;
            &mut owned
        }
    };
    ladder_configs(base)
        .iter()
        .map(|cfg| {
            cfg.validate()?;
            run_on(cfg, workload, timer, &|_| {}).map(|(r, _)| r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Returns preset durations in order, still running the work.
    struct Scripted {
        times: Vec<f64>,
        calls: usize,
    }

    impl Timer for Scripted {
        fn time(&mut self, work: &mut dyn FnMut()) -> f64 {
            work();
            let t = self.times[self.calls % self.times.len()];
            self.calls += 1;
            t
        }
    }

    fn small(variant: Variant) -> RunConfig {
        RunConfig {
            variant,
            n: 64,
            bs: 16,
            workers: 2,
            reps: 1,
            edge_probability: 0.1,
            ..RunConfig::default()
        }
    }

    #[test]
    fn median_definition() {
        assert_eq!(median(&[5.0, 4.0, 3.0, 2.0, 1.0]), 3.0);
        assert_eq!(median(&[2.0, 1.0]), 1.5);
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn median_of_scripted_reps() {
        let cfg = RunConfig {
            reps: 5,
            ..small(Variant::BlockedSerial)
        };
        let mut timer = Scripted {
            times: vec![5.0, 4.0, 3.0, 2.0, 1.0],
            calls: 0,
        };
        let rec = run_with(&cfg, &mut timer).unwrap();
        assert_eq!(rec.wall_time_s, 3.0);
        // Generation and verification never reach the timer.
        assert_eq!(timer.calls, 5);
        assert_eq!(rec.gflops, gflops(64, 3.0));
    }

    #[test]
    fn gflops_formula() {
        assert_eq!(flop_count(1024), 2.0 * 1024f64.powi(3));
        let t = 2.0 * 8192f64.powi(3) / (338.0 * 1e9);
        assert!((t - 3.253).abs() < 1e-3, "{t}");
        assert!((gflops(8192, 3.253) - 338.0).abs() < 0.05);
    }

    #[test]
    fn degenerate_blocking_verifies() {
        let cfg = RunConfig {
            n: 48,
            bs: 48,
            ..small(Variant::BlockedSerial)
        };
        let rec = run(&cfg).unwrap();
        assert_eq!(rec.verified, Verification::Pass);
    }

    #[test]
    fn every_variant_verifies() {
        for v in [
            Variant::Naive,
            Variant::BlockedSerial,
            Variant::BlockedParallel,
        ] {
            let rec = run(&small(v)).unwrap();
            assert_eq!(rec.verified, Verification::Pass, "{v}");
            assert!(rec.mismatch.is_none());
        }
    }

    #[test]
    fn corrupted_solver_fails_verification() {
        let cfg = small(Variant::BlockedSerial);
        let mut w = Workload::generate(&cfg).unwrap();
        let (rec, _) = run_on(&cfg, &mut w, &mut WallClock, &|d| {
            let v = d.get(3, 5);
            d.set(3, 5, v + 1.0);
        })
        .unwrap();
        assert_eq!(rec.verified, Verification::Fail);
        let m = rec.mismatch.unwrap();
        assert_eq!((m.i, m.j), (3, 5));
        assert_eq!(m.actual, m.expected + 1.0);
    }

    #[test]
    fn skipped_above_cap_or_when_disabled() {
        let cfg = RunConfig {
            verify_cap: 32,
            ..small(Variant::BlockedSerial)
        };
        assert_eq!(run(&cfg).unwrap().verified, Verification::Skipped);
        let cfg = RunConfig {
            verify: false,
            ..small(Variant::BlockedSerial)
        };
        assert_eq!(run(&cfg).unwrap().verified, Verification::Skipped);
    }

    #[test]
    fn block_size_sweep_isolates_bad_entries() {
        let base = RunConfig {
            n: 128,
            ..small(Variant::BlockedSerial)
        };
        let out = sweep_block_size(&base, &[16, 100, 32, 64], &mut WallClock, None).unwrap();
        let sizes: Vec<usize> = out.records.iter().map(|r| r.config.bs).collect();
        assert_eq!(sizes, vec![16, 32, 64]);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].0, 100);
        assert!(matches!(out.failures[0].1, BenchError::Config(_)));
        assert!(out.distances_agree);
        assert!(out.records.iter().all(|r| r.verified == Verification::Pass));
    }

    #[test]
    fn worker_sweep() {
        let out = sweep_workers(
            &small(Variant::BlockedSerial),
            &[1, 2, 4],
            &mut WallClock,
            None,
        )
        .unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.failures.is_empty());
        assert!(out.distances_agree);
        for (rec, w) in out.records.iter().zip([1, 2, 4]) {
            assert_eq!(rec.config.variant, Variant::BlockedParallel);
            assert_eq!(rec.config.workers, w);
            assert_eq!(rec.verified, Verification::Pass);
        }
        assert!(sweep_workers(&small(Variant::Naive), &[], &mut WallClock, None).is_err());
    }

    #[test]
    fn ladder_has_four_rungs() {
        let recs = run_ladder(&small(Variant::Naive), &mut WallClock, None).unwrap();
        let names: Vec<(Variant, KernelVariant)> = recs
            .iter()
            .map(|r| (r.config.variant, r.config.kernel))
            .collect();
        assert_eq!(
            names,
            vec![
                (Variant::Naive, KernelVariant::Scalar),
                (Variant::BlockedSerial, KernelVariant::Scalar),
                (Variant::BlockedSerial, KernelVariant::Lanes),
                (Variant::BlockedParallel, KernelVariant::Lanes),
            ]
        );
        assert!(recs.iter().all(|r| r.verified == Verification::Pass));
    }

    #[test]
    fn input_graph_overrides_n() {
        let mut g = DistanceMatrix::new(32).unwrap();
        g.add_edge(0, 31, 2.0);
        let mut w = Workload::from_graph(g);
        let (rec, d) = run_on(
            &small(Variant::BlockedSerial),
            &mut w,
            &mut WallClock,
            &|_| {},
        )
        .unwrap();
        assert_eq!(rec.config.n, 32);
        assert_eq!(d.get(0, 31), 2.0);
        assert_eq!(rec.verified, Verification::Pass);
    }
}
