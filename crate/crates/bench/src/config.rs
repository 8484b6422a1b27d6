use std::fmt;
use std::str::FromStr;

use apsp_core::{check_config, validate_sentinel, GraphSpec, KernelVariant, Pinning, WorkerPool};

use crate::error::{BenchError, Result};

/// Default vertex count for desk-scale runs.
pub const DEFAULT_N: usize = 1024;
/// Largest n verified against the naive solver unless overridden.
pub const DEFAULT_VERIFY_CAP: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Naive,
    BlockedSerial,
    BlockedParallel,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Naive => "naive",
            Variant::BlockedSerial => "blocked-serial",
            Variant::BlockedParallel => "blocked-parallel",
        }
    }

    pub fn is_blocked(self) -> bool {
        self != Variant::Naive
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Variant::Naive),
            "blocked-serial" | "blocked" => Ok(Variant::BlockedSerial),
            "blocked-parallel" | "parallel" => Ok(Variant::BlockedParallel),
            other => Err(format!(
                "unknown variant {other:?} (expected naive, blocked-serial or blocked-parallel)"
            )),
        }
    }
}

/// Everything needed to reproduce one benchmark observation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub kernel: KernelVariant,
    pub n: usize,
    pub bs: usize,
    pub workers: usize,
    pub seed: u64,
    pub edge_probability: f64,
    pub weight_range: (u32, u32),
    pub reps: usize,
    pub verify: bool,
    pub verify_cap: usize,
    pub pinning: Pinning,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            variant: Variant::BlockedParallel,
            kernel: KernelVariant::Lanes,
            n: DEFAULT_N,
            bs: 64,
            workers: WorkerPool::default_workers(),
            seed: 42,
            edge_probability: 0.5,
            weight_range: (1, 100),
            reps: 3,
            verify: true,
            verify_cap: DEFAULT_VERIFY_CAP,
            pinning: Pinning::None,
        }
    }
}

impl RunConfig {
    pub fn graph_spec(&self) -> GraphSpec {
        GraphSpec::new(self.n, self.edge_probability, self.weight_range, self.seed)
    }

    /// Workers actually used by the variant.
    pub fn effective_workers(&self) -> usize {
        match self.variant {
            Variant::BlockedParallel => self.workers,
            _ => 1,
        }
    }

    pub fn pool(&self) -> Result<WorkerPool> {
        Ok(WorkerPool::new(self.workers)?.with_pinning(self.pinning))
    }

    /// Checks solver constraints without allocating anything.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.variant == Variant::BlockedParallel && self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.variant.is_blocked() {
            check_config(self.n, self.bs, self.kernel)
                .map_err(|e| BenchError::Config(e.to_string()))?;
        }
        self.graph_spec()
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        validate_sentinel(self.weight_range.1 as f32, self.n)
            .map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }

    /// Whether this run will be checked against the naive solver.
    pub fn will_verify(&self) -> bool {
        self.verify && self.n <= self.verify_cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn divisibility_and_lane_width() {
        let cfg = RunConfig {
            n: 1024,
            bs: 100,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(BenchError::Config(_))));
        let cfg = RunConfig {
            n: 96,
            bs: 24,
            kernel: KernelVariant::Lanes,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            kernel: KernelVariant::Scalar,
            ..cfg
        };
        assert!(cfg.validate().is_ok());
        // Block size is irrelevant to the naive solver.
        let cfg = RunConfig {
            variant: Variant::Naive,
            n: 100,
            bs: 64,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_degenerate_values() {
        for cfg in [
            RunConfig {
                reps: 0,
                ..RunConfig::default()
            },
            RunConfig {
                n: 0,
                ..RunConfig::default()
            },
            RunConfig {
                workers: 0,
                ..RunConfig::default()
            },
            RunConfig {
                weight_range: (5, 1),
                ..RunConfig::default()
            },
            RunConfig {
                edge_probability: 2.0,
                ..RunConfig::default()
            },
            RunConfig {
                weight_range: (1, 1 << 22),
                n: 1024,
                ..RunConfig::default()
            },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn verification_cap() {
        let cfg = RunConfig {
            n: 4096,
            bs: 256,
            ..RunConfig::default()
        };
        assert!(!cfg.will_verify());
        assert!(RunConfig::default().will_verify());
    }

    #[test]
    fn paper_workloads_are_accepted() {
        for n in [4096, 8192, 16384, 32768, 65536] {
            let cfg = RunConfig {
                n,
                bs: 64,
                ..RunConfig::default()
            };
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [
            Variant::Naive,
            Variant::BlockedSerial,
            Variant::BlockedParallel,
        ] {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
    }
}
