//! Single-threaded blocked Floyd-Warshall.

use crate::error::{Error, Result};
use crate::kernel::{relax_block, KernelVariant, RawMatrices};
use crate::matrix::{check_blocking, BlockRegion, DistanceMatrix, PathMatrix};
use crate::plan::{BlockTask, Phase, RoundPhasePlan};

/// Checks that `n`, `bs` and `variant` can be run by the blocked solvers.
pub fn check_config(n: usize, bs: usize, variant: KernelVariant) -> Result<()> {
    check_blocking(n, bs)?;
    variant.check_block_size(bs)
}

pub(crate) fn raw(d: &mut DistanceMatrix, p: &mut PathMatrix) -> RawMatrices {
    assert_eq!(d.n(), p.n(), "distance and path matrices differ in size");
    assert_eq!(d.stride(), p.stride(), "distance and path strides differ");
    RawMatrices {
        dist: d.as_mut_ptr(),
        path: p.as_mut_ptr(),
        stride: d.stride(),
    }
}

/// # Safety
///
/// Same contract as [`relax_block`]: `task` must come from a plan for the
/// matrices behind `m`, and no concurrently running task may write any
/// block this one touches.
#[inline]
pub(crate) unsafe fn run_task(m: RawMatrices, bs: usize, task: &BlockTask, variant: KernelVariant) {
    let region = |(bi, bj): (usize, usize)| BlockRegion {
        row0: bi * bs,
        col0: bj * bs,
        size: bs,
    };
    relax_block(
        m,
        region(task.target),
        region(task.row_src()),
        region(task.col_src()),
        task.round * bs,
        variant,
    );
}

fn check_region(n: usize, r: &BlockRegion, size: usize, what: &str) -> Result<()> {
    let on_grid = r.size == size && r.row0.is_multiple_of(size) && r.col0.is_multiple_of(size);
    if !on_grid || r.row0 + size > n || r.col0 + size > n {
        return Err(Error::InvalidSize(format!(
            "{what} region {r:?} is not a {size}x{size} block of an {n}x{n} matrix"
        )));
    }
    Ok(())
}

/// Relaxes the `target` block through pivots `base_k .. base_k + bs`: for
/// each pivot offset (outermost), each target row, each target column, a
/// strictly shorter `row_src[i][k'] + col_src[k'][j]` replaces the distance
/// and records `base_k + k'` as the intermediate.
///
/// `target` may be the same block as either source.
#[allow(clippy::too_many_arguments)]
pub fn fw_block(
    d: &mut DistanceMatrix,
    p: &mut PathMatrix,
    target: BlockRegion,
    row_src: BlockRegion,
    col_src: BlockRegion,
    base_k: usize,
    variant: KernelVariant,
) -> Result<()> {
    let n = d.n();
    let bs = target.size;
    if p.n() != n {
        return Err(Error::SizeMismatch(format!(
            "path matrix is {}x{0}, distances are {n}x{n}",
            p.n()
        )));
    }
    check_region(n, &target, bs, "target")?;
    check_region(n, &row_src, bs, "row source")?;
    check_region(n, &col_src, bs, "column source")?;
    variant.check_block_size(bs)?;
    if base_k + bs > n {
        return Err(Error::VertexOutOfRange {
            vertex: base_k + bs - 1,
            n,
        });
    }
    let m = raw(d, p);
    // SAFETY: regions validated above; the exclusive borrows rule out
    // concurrent access.
    unsafe { relax_block(m, target, row_src, col_src, base_k, variant) };
    Ok(())
}

/// Solves `d` in place, round by round and phase by phase, recording
/// intermediates in `p`.
pub fn fw_blocked_serial(
    d: &mut DistanceMatrix,
    p: &mut PathMatrix,
    bs: usize,
    variant: KernelVariant,
) -> Result<()> {
    let n = d.n();
    check_config(n, bs, variant)?;
    let m = raw(d, p);
    let grid = n / bs;
    for k in 0..grid {
        let plan = RoundPhasePlan::new(k, grid);
        for phase in Phase::ALL {
            for task in plan.tasks(phase) {
                // SAFETY: tasks come from the plan for this matrix and run
                // one at a time.
                unsafe { run_task(m, bs, &task, variant) };
            }
        }
    }
    Ok(())
}
