//! The textbook triple loop, path reconstruction, and two independent
//! brute-force verifiers used to check every other solver.

use crate::error::{Error, Result};
use crate::matrix::{DistanceMatrix, PathMatrix, INF, NO_INTERMEDIATE};

/// Largest graph the simple-path enumeration oracle accepts.
pub const ENUMERATION_LIMIT: usize = 10;
/// Largest graph the min-plus squaring oracle accepts.
pub const SQUARING_LIMIT: usize = 64;

/// Solved distances together with the intermediate-vertex records.
#[derive(Clone, Debug, PartialEq)]
pub struct ApspResult {
    pub distances: DistanceMatrix,
    pub paths: PathMatrix,
}

impl ApspResult {
    /// Runs [`fw_naive`] on `graph`.
    pub fn naive(graph: DistanceMatrix) -> Result<Self> {
        let mut paths = PathMatrix::new(graph.n())?;
        let mut distances = graph;
        fw_naive(&mut distances, &mut paths);
        Ok(Self { distances, paths })
    }

    pub fn path(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        reconstruct_path(&self.distances, &self.paths, i, j)
    }
}

/// In-place Floyd-Warshall. For each pivot `k`, `d[i][j]` is replaced by
/// `d[i][k] + d[k][j]` only when strictly shorter, and `p[i][j]` then records
/// `k`.
pub fn fw_naive(d: &mut DistanceMatrix, p: &mut PathMatrix) {
    let n = d.n();
    assert_eq!(n, p.n(), "distance and path matrices differ in size");
    let stride = d.stride();
    let dist = d.flat_mut();
    let path = p.flat_mut();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = dist[i * stride + k] + dist[k * stride + j];
                if through < dist[i * stride + j] {
                    dist[i * stride + j] = through;
                    path[i * stride + j] = k as i32;
                }
            }
        }
    }
}

/// Expands the recorded intermediate vertices into the vertex sequence
/// `i .. j`. Returns an empty sequence for unreachable pairs and `[i]` for
/// `i == j`.
pub fn reconstruct_path(
    d: &DistanceMatrix,
    p: &PathMatrix,
    i: usize,
    j: usize,
) -> Result<Vec<usize>> {
    let n = d.n();
    for v in [i, j] {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    if i == j {
        return Ok(vec![i]);
    }
    if d.get(i, j) >= INF {
        return Ok(Vec::new());
    }

    let corrupt = |msg: String| Error::PathCorruption { i, j, msg };
    let mut out = vec![i];
    let mut visited = vec![false; n];
    visited[i] = true;
    // A valid expansion tree has at most n - 1 leaves, so at most 2n nodes.
    let mut budget = 2 * n;
    let mut stack = vec![(i, j)];
    while let Some((a, b)) = stack.pop() {
        if budget == 0 {
            return Err(corrupt("expansion does not terminate".into()));
        }
        budget -= 1;
        let k = p.get(a, b);
        if k == NO_INTERMEDIATE {
            if visited[b] {
                return Err(corrupt(format!("vertex {b} visited twice")));
            }
            visited[b] = true;
            out.push(b);
            continue;
        }
        let k = usize::try_from(k)
            .ok()
            .filter(|&k| k < n && k != a && k != b)
            .ok_or_else(|| {
                corrupt(format!(
                    "entry ({a}, {b}) = {k} is not a valid intermediate"
                ))
            })?;
        stack.push((k, b));
        stack.push((a, k));
    }
    Ok(out)
}

fn saturating_add(a: f32, b: f32) -> f32 {
    if a >= INF || b >= INF {
        INF
    } else {
        (a + b).min(INF)
    }
}

/// Exact distances by enumerating every simple path from every source.
pub fn enumerate_simple_paths(d0: &DistanceMatrix) -> Result<DistanceMatrix> {
    let n = d0.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::OracleLimit {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }

    fn walk(d0: &DistanceMatrix, at: usize, cost: f32, visited: &mut [bool], best: &mut [f32]) {
        for next in 0..d0.n() {
            let w = d0.get(at, next);
            if visited[next] || w >= INF {
                continue;
            }
            let c = saturating_add(cost, w);
            if c < best[next] {
                best[next] = c;
            }
            visited[next] = true;
            walk(d0, next, c, visited, best);
            visited[next] = false;
        }
    }

    let mut out = DistanceMatrix::new(n)?;
    for src in 0..n {
        let mut best = vec![INF; n];
        best[src] = 0.0;
        let mut visited = vec![false; n];
        visited[src] = true;
        walk(d0, src, 0.0, &mut visited, &mut best);
        out.row_mut(src).copy_from_slice(&best);
    }
    Ok(out)
}

/// Exact distances as the `ceil(log2 n)`-th min-plus square of the
/// zero-diagonal adjacency matrix.
pub fn min_plus_squaring(d0: &DistanceMatrix) -> Result<DistanceMatrix> {
    let n = d0.n();
    if n > SQUARING_LIMIT {
        return Err(Error::OracleLimit {
            n,
            limit: SQUARING_LIMIT,
        });
    }
    let mut cur: Vec<f32> = d0.to_vec();
    for i in 0..n {
        cur[i * n + i] = 0.0;
    }
    // After s squarings, cur covers all paths of up to 2^s edges.
    let mut hops = 1;
    while hops < n.saturating_sub(1) {
        let mut next = vec![INF; n * n];
        for i in 0..n {
            for j in 0..n {
                next[i * n + j] = (0..n)
                    .map(|m| saturating_add(cur[i * n + m], cur[m * n + j]))
                    .fold(INF, f32::min);
            }
        }
        cur = next;
        hops *= 2;
    }
    DistanceMatrix::from_row_major(n, &cur)
}

/// Exact distances computed without any Floyd-Warshall code.
pub fn brute_force_oracle(d0: &DistanceMatrix) -> Result<DistanceMatrix> {
    min_plus_squaring(d0)
}
