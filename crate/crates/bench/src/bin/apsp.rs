use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use apsp_bench::harness::{run_ladder, run_on, sweep_block_size, sweep_workers};
use apsp_bench::{
    emit_table, write_csv, BenchError, BenchRecord, Result, RunConfig, SweepOutcome, Variant,
    Verification, WallClock, Workload, DEFAULT_N, DEFAULT_VERIFY_CAP,
};
use apsp_core::io::write_edge_list;
use apsp_core::{generate_graph, read_matrix, write_matrix, KernelVariant, Pinning, WorkerPool};
use clap::{ArgAction, Args, Parser, Subcommand};

/// Blocked Floyd-Warshall benchmark driver.
#[derive(Parser, Debug)]
#[command(name = "apsp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time one configuration (or the full variant ladder with --ladder).
    Run {
        #[command(flatten)]
        opts: Opts,
        /// Run naive, blocked scalar, blocked lanes and parallel lanes in turn.
        #[arg(long)]
        ladder: bool,
    },
    /// Time one run per block size in --bs.
    SweepBs {
        #[command(flatten)]
        opts: Opts,
    },
    /// Time blocked-parallel once per worker count in --workers.
    SweepWorkers {
        #[command(flatten)]
        opts: Opts,
    },
    /// Generate a random graph and write it to --out (.txt for an edge list).
    Gen {
        #[command(flatten)]
        opts: Opts,
    },
    /// Solve --input with the chosen variant and compare against the naive solver.
    Verify {
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args, Debug)]
struct Opts {
    /// naive, blocked-serial or blocked-parallel
    #[arg(long, default_value = "blocked-parallel")]
    variant: Variant,

    /// scalar or lanes
    #[arg(long, default_value = "lanes")]
    kernel: KernelVariant,

    /// Vertex count
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,

    /// Block size; a comma-separated list for sweep-bs
    #[arg(long, value_delimiter = ',', default_value = "64")]
    bs: Vec<usize>,

    /// Worker threads; a comma-separated list for sweep-workers (default: one per core)
    #[arg(long, value_delimiter = ',')]
    workers: Vec<usize>,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Edge probability
    #[arg(long, default_value_t = 0.5)]
    p: f64,

    #[arg(long, default_value_t = 1)]
    wmin: u32,

    #[arg(long, default_value_t = 100)]
    wmax: u32,

    /// Timed repetitions; the median is reported
    #[arg(long, default_value_t = 3)]
    reps: usize,

    /// Check distances against the naive solver (n up to --verify-cap)
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    verify: bool,

    #[arg(long, default_value_t = DEFAULT_VERIFY_CAP)]
    verify_cap: usize,

    /// none, spread or compact
    #[arg(long, default_value = "none")]
    pin: Pinning,

    /// CSV output (or the graph file for gen)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Binary matrix or text edge list to solve instead of a generated graph
    #[arg(long)]
    input: Option<PathBuf>,
}

impl Opts {
    fn config(&self) -> RunConfig {
        RunConfig {
            variant: self.variant,
            kernel: self.kernel,
            n: self.n,
            bs: self.bs.first().copied().unwrap_or(64),
            workers: self
                .workers
                .first()
                .copied()
                .unwrap_or_else(WorkerPool::default_workers),
            seed: self.seed,
            edge_probability: self.p,
            weight_range: (self.wmin, self.wmax),
            reps: self.reps,
            verify: self.verify,
            verify_cap: self.verify_cap,
            pinning: self.pin,
        }
    }

    /// The graph to solve and the config adjusted to its size.
    fn workload(&self) -> Result<(RunConfig, Workload)> {
        let mut config = self.config();
        match &self.input {
            Some(path) => {
                let graph = read_matrix(path)?;
                config.n = graph.n();
                Ok((config, Workload::from_graph(graph)))
            }
            None => {
                let w = Workload::generate(&config)?;
                Ok((config, w))
            }
        }
    }

    /// Like [`Opts::workload`], but only the graph parameters are validated
    /// up front; per-entry problems are reported by the sweep.
    fn workload_for_sweep(&self) -> Result<(RunConfig, Workload)> {
        let mut config = self.config();
        match &self.input {
            Some(path) => {
                let graph = read_matrix(path)?;
                config.n = graph.n();
                Ok((config, Workload::from_graph(graph)))
            }
            None => {
                let spec = config.graph_spec();
                spec.validate()?;
                Ok((config, Workload::from_graph(generate_graph(&spec)?)))
            }
        }
    }
}

fn report(records: &[BenchRecord], out: Option<&Path>) -> Result<()> {
    print!("{}", emit_table(records)?);
    match out {
        Some(path) => write_csv(records, path),
        None => Ok(()),
    }
}

fn check_verified(records: &[BenchRecord]) -> Result<()> {
    match records.iter().find(|r| r.verified == Verification::Fail) {
        Some(r) => Err(BenchError::Verification(
            r.mismatch.expect("failed records carry a mismatch"),
        )),
        None => Ok(()),
    }
}

fn report_sweep(outcome: SweepOutcome, out: Option<&Path>) -> Result<()> {
    for (value, err) in &outcome.failures {
        eprintln!("skipped {value}: {err}");
    }
    if outcome.records.is_empty() {
        return Err(BenchError::Config("no sweep entry could run".into()));
    }
    report(&outcome.records, out)?;
    if let Some(best) = outcome
        .records
        .iter()
        .min_by(|a, b| a.wall_time_s.total_cmp(&b.wall_time_s))
    {
        println!(
            "fastest: bs={} workers={} ({:.4} s)",
            best.config.bs,
            best.config.effective_workers(),
            best.wall_time_s
        );
    }
    if !outcome.distances_agree {
        eprintln!("warning: sweep entries produced different distance matrices");
    }
    check_verified(&outcome.records)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { opts, ladder } => {
            let (config, mut workload) = opts.workload()?;
            let records = if ladder {
                run_ladder(&config, &mut WallClock, Some(&mut workload))?
            } else {
                vec![run_on(&config, &mut workload, &mut WallClock, &|_| {})?.0]
            };
            report(&records, opts.out.as_deref())?;
            check_verified(&records)
        }
        Command::SweepBs { opts } => {
            let (config, mut workload) = opts.workload_for_sweep()?;
            let outcome = sweep_block_size(&config, &opts.bs, &mut WallClock, Some(&mut workload))?;
            report_sweep(outcome, opts.out.as_deref())
        }
        Command::SweepWorkers { opts } => {
            let (config, mut workload) = opts.workload_for_sweep()?;
            let list = if opts.workers.is_empty() {
                vec![config.workers]
            } else {
                opts.workers.clone()
            };
            let outcome = sweep_workers(&config, &list, &mut WallClock, Some(&mut workload))?;
            report_sweep(outcome, opts.out.as_deref())
        }
        Command::Gen { opts } => {
            let config = opts.config();
            let path = opts
                .out
                .as_deref()
                .ok_or_else(|| BenchError::Config("gen needs --out".into()))?;
            config.graph_spec().validate()?;
            let graph = generate_graph(&config.graph_spec())?;
            if path.extension().is_some_and(|e| e == "txt") {
                let mut w = BufWriter::new(File::create(path)?);
                write_edge_list(&graph, &mut w)?;
                w.flush()?;
            } else {
                write_matrix(&graph, path)?;
            }
            eprintln!("wrote {}-vertex graph to {}", graph.n(), path.display());
            Ok(())
        }
        Command::Verify { opts } => {
            if opts.input.is_none() {
                return Err(BenchError::Config("verify needs --input".into()));
            }
            let (config, mut workload) = opts.workload()?;
            let config = RunConfig {
                verify: true,
                verify_cap: usize::MAX,
                reps: 1,
                ..config
            };
            let (record, _) = run_on(&config, &mut workload, &mut WallClock, &|_| {})?;
            let records = [record];
            report(&records, opts.out.as_deref())?;
            check_verified(&records)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
