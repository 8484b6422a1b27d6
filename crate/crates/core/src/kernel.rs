//! The per-block relaxation kernel.
//!
//! Both variants run the pivot loop outermost, then target rows, then
//! target columns, and apply the same strict `<` rule, so they write the
//! same values to the same cells in the same pivot order.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::BlockRegion;

/// Width of one lane group: sixteen f32 values, one 512-bit register.
pub const LANES: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum KernelVariant {
    /// Plain conditional update, left for the compiler to vectorize.
    #[default]
    Scalar,
    /// Explicit 16-lane add, compare and masked select.
    Lanes,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 2] = [KernelVariant::Scalar, KernelVariant::Lanes];

    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::Scalar => "scalar",
            KernelVariant::Lanes => "lanes",
        }
    }

    pub fn check_block_size(self, bs: usize) -> Result<()> {
        match self {
            KernelVariant::Lanes if !bs.is_multiple_of(LANES) => {
                Err(Error::LaneWidth { bs, lanes: LANES })
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "scalar" => Ok(KernelVariant::Scalar),
            "lanes" => Ok(KernelVariant::Lanes),
            other => Err(format!(
                "unknown kernel {other:?} (expected scalar or lanes)"
            )),
        }
    }
}

/// One lane-group step: `sum = a + col`, `mask = sum < dist`, then a
/// bitwise select of `sum`/`pivot` into the distance and path lanes.
#[inline(always)]
pub fn lanes_step(
    dist: &mut [f32; LANES],
    path: &mut [i32; LANES],
    col: &[f32; LANES],
    a: f32,
    pivot: i32,
) {
    let mut sum = [0f32; LANES];
    let mut mask = [0u32; LANES];
    for l in 0..LANES {
        sum[l] = a + col[l];
        mask[l] = 0u32.wrapping_sub((sum[l] < dist[l]) as u32);
    }
    for l in 0..LANES {
        dist[l] = f32::from_bits((sum[l].to_bits() & mask[l]) | (dist[l].to_bits() & !mask[l]));
        path[l] = ((pivot as u32 & mask[l]) | (path[l] as u32 & !mask[l])) as i32;
    }
}

#[inline(always)]
fn row_scalar(dist: &mut [f32], path: &mut [i32], col: &[f32], a: f32, pivot: i32) {
    for ((d, p), &c) in dist.iter_mut().zip(path.iter_mut()).zip(col) {
        let s = a + c;
        if s < *d {
            *d = s;
            *p = pivot;
        }
    }
}

#[inline(always)]
fn row_lanes(dist: &mut [f32], path: &mut [i32], col: &[f32], a: f32, pivot: i32) {
    for ((d, p), c) in dist
        .chunks_exact_mut(LANES)
        .zip(path.chunks_exact_mut(LANES))
        .zip(col.chunks_exact(LANES))
    {
        lanes_step(
            d.try_into().unwrap(),
            p.try_into().unwrap(),
            c.try_into().unwrap(),
            a,
            pivot,
        );
    }
}

/// Raw view of a distance/path matrix pair with a shared row stride.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RawMatrices {
    pub dist: *mut f32,
    pub path: *mut i32,
    pub stride: usize,
}

// SAFETY: the pointers are only dereferenced through `relax_block`, whose
// callers guarantee that concurrently relaxed target blocks are disjoint and
// that no block is written while another task reads it.
unsafe impl Send for RawMatrices {}
unsafe impl Sync for RawMatrices {}

/// Relaxes `target` through pivots `base_k .. base_k + size`, reading the
/// pivot column from `row_src` and the pivot row from `col_src`.
///
/// # Safety
///
/// All three regions must lie inside the matrices behind `m`, be the same
/// size, and sit on the block grid (so any two are identical or disjoint).
/// No other thread may access `target` concurrently, and no other thread may
/// write `row_src` or `col_src`. Entries must be non-negative.
pub(crate) unsafe fn relax_block(
    m: RawMatrices,
    target: BlockRegion,
    row_src: BlockRegion,
    col_src: BlockRegion,
    base_k: usize,
    variant: KernelVariant,
) {
    let bs = target.size;
    for kk in 0..bs {
        let pivot = (base_k + kk) as i32;
        let col_ptr = m.dist.add((col_src.row0 + kk) * m.stride + col_src.col0);
        for i in 0..bs {
            let row_off = (target.row0 + i) * m.stride + target.col0;
            let dist_ptr = m.dist.add(row_off);
            // The target row is the pivot row itself: its pivot-column entry
            // is a diagonal zero-or-more, so a + x < x never holds.
            if std::ptr::eq(dist_ptr, col_ptr) {
                continue;
            }
            let a = *m
                .dist
                .add((row_src.row0 + i) * m.stride + row_src.col0 + kk);
            let dist = std::slice::from_raw_parts_mut(dist_ptr, bs);
            let path = std::slice::from_raw_parts_mut(m.path.add(row_off), bs);
            let col = std::slice::from_raw_parts(col_ptr as *const f32, bs);
            match variant {
                KernelVariant::Scalar => row_scalar(dist, path, col, a, pivot),
                KernelVariant::Lanes => row_lanes(dist, path, col, a, pivot),
            }
        }
    }
}
