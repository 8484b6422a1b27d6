//! Dense square matrices with 64-byte aligned rows.
//!
//! Storage is row-major with a row stride rounded up to a whole number of
//! cache lines, so every row (and therefore every block row) starts on a
//! 64-byte boundary. Padding columns are never read by the solvers.

use std::alloc::{self, Layout};
use std::fmt;
use std::ops::Range;
use std::ptr::NonNull;

use crate::error::{Error, Result};

/// Row alignment in bytes.
pub const ALIGN: usize = 64;

/// Encoding of "no edge". A finite power of two keeps `INF + w` finite and
/// never less than `INF` for non-negative `w`, so relaxations through a
/// missing edge can never win a strict comparison.
pub const INF: f32 = 1_073_741_824.0; // 2^30

/// Path entry for pairs whose recorded path is the direct edge.
pub const NO_INTERMEDIATE: i32 = -1;

/// Largest integer magnitude below which every f32 sum is exact.
pub const EXACT_LIMIT: f32 = 16_777_216.0; // 2^24

pub trait Element: Copy + PartialEq + Send + Sync + 'static {
    /// Value stored in the padding columns.
    const PAD: Self;
    /// Element-kind tag of the binary matrix format.
    const KIND: u32;
    fn bits(self) -> u32;
    fn from_bits(bits: u32) -> Self;
}

impl Element for f32 {
    const PAD: Self = INF;
    const KIND: u32 = 0;
    fn bits(self) -> u32 {
        self.to_bits()
    }
    fn from_bits(bits: u32) -> Self {
        f32::from_bits(bits)
    }
}

impl Element for i32 {
    const PAD: Self = NO_INTERMEDIATE;
    const KIND: u32 = 1;
    fn bits(self) -> u32 {
        self as u32
    }
    fn from_bits(bits: u32) -> Self {
        bits as i32
    }
}

struct AlignedBuf<T: Element> {
    ptr: NonNull<T>,
    len: usize,
}

// SAFETY: the buffer uniquely owns its allocation of plain `Copy` data.
unsafe impl<T: Element> Send for AlignedBuf<T> {}
unsafe impl<T: Element> Sync for AlignedBuf<T> {}

impl<T: Element> AlignedBuf<T> {
    fn layout(len: usize) -> Result<Layout> {
        let bytes = len
            .checked_mul(std::mem::size_of::<T>())
            .ok_or(Error::Allocation { bytes: usize::MAX })?;
        Layout::from_size_align(bytes.max(ALIGN), ALIGN).map_err(|_| Error::Allocation { bytes })
    }

    fn filled(len: usize, value: T) -> Result<Self> {
        let layout = Self::layout(len)?;
        // SAFETY: layout has non-zero size.
        let raw = unsafe { alloc::alloc(layout) } as *mut T;
        let ptr = NonNull::new(raw).ok_or(Error::Allocation {
            bytes: layout.size(),
        })?;
        for idx in 0..len {
            // SAFETY: idx < len and the allocation holds len elements.
            unsafe { ptr.as_ptr().add(idx).write(value) };
        }
        Ok(Self { ptr, len })
    }

    fn as_slice(&self) -> &[T] {
        // SAFETY: len initialized elements.
        unsafe { std::slice::from_raw_parts(self.ptr.as_ptr(), self.len) }
    }

    fn as_mut_slice(&mut self) -> &mut [T] {
        // SAFETY: len initialized elements, unique borrow.
        unsafe { std::slice::from_raw_parts_mut(self.ptr.as_ptr(), self.len) }
    }
}

impl<T: Element> Clone for AlignedBuf<T> {
    fn clone(&self) -> Self {
        let layout = Self::layout(self.len).expect("layout was valid at allocation");
        let mut out = match Self::filled(self.len, T::PAD) {
            Ok(buf) => buf,
            Err(_) => alloc::handle_alloc_error(layout),
        };
        out.as_mut_slice().copy_from_slice(self.as_slice());
        out
    }
}

impl<T: Element> Drop for AlignedBuf<T> {
    fn drop(&mut self) {
        let layout = Self::layout(self.len).expect("layout was valid at allocation");
        // SAFETY: allocated in `filled` with this exact layout.
        unsafe { alloc::dealloc(self.ptr.as_ptr() as *mut u8, layout) };
    }
}

/// An `n x n` row-major matrix whose rows start on 64-byte boundaries.
#[derive(Clone)]
pub struct Matrix<T: Element> {
    n: usize,
    stride: usize,
    buf: AlignedBuf<T>,
}

/// Single-precision shortest-path distances.
pub type DistanceMatrix = Matrix<f32>;

/// Intermediate-vertex records used for path reconstruction.
pub type PathMatrix = Matrix<i32>;

impl<T: Element> Matrix<T> {
    fn filled(n: usize, value: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(
                "matrix must have at least one vertex".into(),
            ));
        }
        let per_line = ALIGN / std::mem::size_of::<T>();
        let stride = n.div_ceil(per_line) * per_line;
        let len = stride
            .checked_mul(n)
            .ok_or(Error::Allocation { bytes: usize::MAX })?;
        let mut buf = AlignedBuf::filled(len, T::PAD)?;
        for row in buf.as_mut_slice().chunks_exact_mut(stride) {
            row[..n].fill(value);
        }
        Ok(Self { n, stride, buf })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Distance in elements between the starts of consecutive rows.
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        assert!(j < self.n, "column {j} out of range");
        self.buf.as_slice()[i * self.stride + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        assert!(j < self.n, "column {j} out of range");
        self.buf.as_mut_slice()[i * self.stride + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        let start = i * self.stride;
        &self.buf.as_slice()[start..start + self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        let start = i * self.stride;
        let n = self.n;
        &mut self.buf.as_mut_slice()[start..start + n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    /// Logical contents, row-major, without padding.
    pub fn to_vec(&self) -> Vec<T> {
        self.rows().flat_map(|r| r.iter().copied()).collect()
    }

    pub(crate) fn from_row_major_with(n: usize, values: &[T], fill: T) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::SizeMismatch(format!(
                "{} values supplied for an {n}x{n} matrix",
                values.len()
            )));
        }
        let mut m = Self::filled(n, fill)?;
        for (i, src) in values.chunks_exact(n).enumerate() {
            m.row_mut(i).copy_from_slice(src);
        }
        Ok(m)
    }

    /// The whole padded buffer; element `(i, j)` is at `i * stride + j`.
    pub(crate) fn flat_mut(&mut self) -> &mut [T] {
        self.buf.as_mut_slice()
    }

    pub fn as_ptr(&self) -> *const T {
        self.buf.ptr.as_ptr()
    }

    pub fn as_mut_ptr(&mut self) -> *mut T {
        self.buf.ptr.as_ptr()
    }

    /// First cell whose bit pattern differs from `other`, in row-major order.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize, T, T)> {
        assert_eq!(self.n, other.n, "matrix sizes differ");
        for i in 0..self.n {
            let (a, b) = (self.row(i), other.row(i));
            if let Some(j) = (0..self.n).find(|&j| a[j].bits() != b[j].bits()) {
                return Some((i, j, a[j], b[j]));
            }
        }
        None
    }

    /// Descriptor for the `bs x bs` block at block coordinates `(bi, bj)`.
    pub fn block_view(&self, bi: usize, bj: usize, bs: usize) -> Result<BlockRegion> {
        BlockRegion::new(self.n, bi, bj, bs)
    }
}

impl<T: Element> PartialEq for Matrix<T> {
    /// Bitwise equality of the logical contents.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.first_difference(other).is_none()
    }
}

impl<T: Element + fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 8 {
            let mut list = f.debug_list();
            for r in self.rows() {
                list.entry(&r);
            }
            list.finish()
        } else {
            write!(f, "Matrix {{ n: {}, stride: {} }}", self.n, self.stride)
        }
    }
}

impl Matrix<f32> {
    /// Zero diagonal, `INF` everywhere else.
    pub fn new(n: usize) -> Result<Self> {
        let mut m = Self::filled(n, INF)?;
        for i in 0..n {
            m.set(i, i, 0.0);
        }
        Ok(m)
    }

    pub fn from_row_major(n: usize, values: &[f32]) -> Result<Self> {
        Self::from_row_major_with(n, values, INF)
    }

    /// Adds a directed edge, keeping the lighter weight on duplicates.
    /// Self-loops are ignored since the diagonal is pinned to zero.
    pub fn add_edge(&mut self, u: usize, v: usize, w: f32) {
        if u != v && w < self.get(u, v) {
            self.set(u, v, w);
        }
    }

    /// Largest finite off-diagonal entry, or `None` for an edgeless graph.
    pub fn max_weight(&self) -> Option<f32> {
        self.rows()
            .flat_map(|r| r.iter().copied())
            .filter(|&w| w < INF && w > 0.0)
            .reduce(f32::max)
    }
}

impl Matrix<i32> {
    /// Every entry `NO_INTERMEDIATE`.
    pub fn new(n: usize) -> Result<Self> {
        Self::filled(n, NO_INTERMEDIATE)
    }

    pub fn from_row_major(n: usize, values: &[i32]) -> Result<Self> {
        Self::from_row_major_with(n, values, NO_INTERMEDIATE)
    }
}

/// A `size x size` window into a matrix, addressed by its top-left element.
/// Carries no borrow; the solvers resolve it against the matrix stride.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockRegion {
    pub row0: usize,
    pub col0: usize,
    pub size: usize,
}

impl BlockRegion {
    pub fn new(n: usize, bi: usize, bj: usize, bs: usize) -> Result<Self> {
        check_blocking(n, bs)?;
        let grid = n / bs;
        if bi >= grid || bj >= grid {
            return Err(Error::BlockOutOfRange { bi, bj, grid });
        }
        Ok(Self {
            row0: bi * bs,
            col0: bj * bs,
            size: bs,
        })
    }

    pub fn rows(&self) -> Range<usize> {
        self.row0..self.row0 + self.size
    }

    pub fn cols(&self) -> Range<usize> {
        self.col0..self.col0 + self.size
    }
}

pub(crate) fn check_blocking(n: usize, bs: usize) -> Result<()> {
    if n == 0 || bs == 0 {
        return Err(Error::InvalidSize(format!(
            "n and block size must be positive (n = {n}, bs = {bs})"
        )));
    }
    if !n.is_multiple_of(bs) {
        return Err(Error::Divisibility { n, bs });
    }
    Ok(())
}

/// Allocates an initialized distance/path pair for an `n`-vertex graph that
/// will be solved with `bs x bs` blocks.
pub fn allocate_matrices(n: usize, bs: usize) -> Result<(DistanceMatrix, PathMatrix)> {
    check_blocking(n, bs)?;
    Ok((DistanceMatrix::new(n)?, PathMatrix::new(n)?))
}

/// Rejects configurations where a simple path could reach the sentinel.
pub fn validate_sentinel(max_weight: f32, n: usize) -> Result<()> {
    let hops = n.saturating_sub(1);
    if max_weight.is_finite() && (max_weight as f64) * (hops as f64) < INF as f64 {
        Ok(())
    } else {
        Err(Error::SentinelTooSmall {
            inf: INF,
            max_weight,
            hops,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_cache_line_aligned() {
        for n in [1, 3, 16, 17, 100, 257] {
            let (d, p) = allocate_matrices(n, 1).unwrap();
            for i in 0..n {
                assert_eq!(
                    d.row(i).as_ptr() as usize % ALIGN,
                    0,
                    "distance row {i}, n={n}"
                );
                assert_eq!(p.row(i).as_ptr() as usize % ALIGN, 0, "path row {i}, n={n}");
            }
        }
    }

    #[test]
    fn fresh_matrices_are_initialized() {
        let (d, p) = allocate_matrices(48, 16).unwrap();
        for i in 0..48 {
            for j in 0..48 {
                let want = if i == j { 0.0 } else { INF };
                assert_eq!(d.get(i, j), want);
                assert_eq!(p.get(i, j), NO_INTERMEDIATE);
            }
        }
    }

    #[test]
    fn paper_scale_block_count() {
        let n: usize = 4096;
        let bs = 256;
        check_blocking(n, bs).unwrap();
        assert_eq!((n / bs) * (n / bs), 256);
        let last = BlockRegion::new(n, 15, 15, bs).unwrap();
        assert_eq!(last.rows(), 3840..4096);
    }

    #[test]
    fn single_vertex() {
        let (d, p) = allocate_matrices(1, 1).unwrap();
        assert_eq!(d.to_vec(), vec![0.0]);
        assert_eq!(p.to_vec(), vec![NO_INTERMEDIATE]);
    }

    #[test]
    fn divisibility_error_names_both_values() {
        let err = allocate_matrices(100, 64).unwrap_err();
        assert!(matches!(err, Error::Divisibility { n: 100, bs: 64 }));
        let msg = err.to_string();
        assert!(msg.contains("100") && msg.contains("64"), "{msg}");
    }

    #[test]
    fn block_views() {
        let d = DistanceMatrix::new(4096).unwrap();
        let b = d.block_view(0, 0, 256).unwrap();
        assert_eq!((b.rows(), b.cols()), (0..256, 0..256));

        let d = DistanceMatrix::new(512).unwrap();
        let b = d.block_view(7, 7, 64).unwrap();
        assert_eq!((b.rows(), b.cols()), (448..512, 448..512));
        assert!(matches!(
            d.block_view(8, 0, 64),
            Err(Error::BlockOutOfRange {
                bi: 8,
                bj: 0,
                grid: 8
            })
        ));
    }

    #[test]
    fn zero_size_rejected() {
        assert!(DistanceMatrix::new(0).is_err());
        assert!(allocate_matrices(0, 1).is_err());
        assert!(allocate_matrices(4, 0).is_err());
    }

    #[test]
    fn clone_preserves_alignment_and_contents() {
        let mut d = DistanceMatrix::new(20).unwrap();
        d.add_edge(3, 7, 4.0);
        let c = d.clone();
        assert_eq!(c, d);
        assert_eq!(c.row(1).as_ptr() as usize % ALIGN, 0);
    }

    #[test]
    fn sentinel_headroom() {
        assert!(validate_sentinel(100.0, 65536).is_ok());
        assert!(validate_sentinel(1_048_576.0, 1024).is_ok());
        assert!(validate_sentinel(1_048_576.0, 2048).is_err());
        // INF + w stays finite and never drops below INF.
        for w in [0.0f32, 1.0, 100.0, 1_048_576.0, INF] {
            let s = INF + w;
            assert!(s.is_finite() && s >= INF);
        }
    }
}
