//! Matrix files.
//!
//! Binary layout: a 16-byte header (`b"FWM1"`, `u32` n, `u32` element kind,
//! `u32` reserved = 0) followed by `n * n` little-endian elements in
//! row-major order. Kind 0 is an f32 distance matrix, kind 1 an i32 path
//! matrix.
//!
//! Text layout is an edge list: a first line `n m`, then `m` lines `u v w`
//! with 0-based vertices and a decimal weight. Pairs without an edge are
//! `INF`.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{DistanceMatrix, Element, Matrix, PathMatrix, INF, NO_INTERMEDIATE};

pub const MAGIC: &[u8; 4] = b"FWM1";
pub const HEADER_LEN: usize = 16;

pub fn encode<T: Element>(m: &Matrix<T>) -> Vec<u8> {
    let n = m.n();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * n * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&T::KIND.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for row in m.rows() {
        for &v in row {
            out.extend_from_slice(&v.bits().to_le_bytes());
        }
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn decode<T: Element>(bytes: &[u8]) -> Result<Matrix<T>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::MalformedHeader(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    let n = read_u32(bytes, 4) as usize;
    let kind = read_u32(bytes, 8);
    let reserved = read_u32(bytes, 12);
    if n == 0 {
        return Err(Error::MalformedHeader("declared n = 0".into()));
    }
    if kind != T::KIND {
        return Err(Error::MalformedHeader(format!(
            "element kind {kind}, expected {}",
            T::KIND
        )));
    }
    if reserved != 0 {
        return Err(Error::MalformedHeader(format!(
            "reserved field is {reserved}"
        )));
    }
    let payload = n
        .checked_mul(n)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::SizeMismatch(format!("n = {n} overflows the payload size")))?;
    let found = bytes.len() - HEADER_LEN;
    if found < payload {
        return Err(Error::Truncated {
            expected: payload,
            found,
        });
    }
    if found > payload {
        return Err(Error::SizeMismatch(format!(
            "{} trailing bytes after an {n}x{n} payload",
            found - payload
        )));
    }
    let values: Vec<T> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| T::from_bits(u32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Matrix::from_row_major_with(n, &values, T::PAD)
}

pub fn decode_distances(bytes: &[u8]) -> Result<DistanceMatrix> {
    let m: DistanceMatrix = decode(bytes)?;
    for (i, row) in m.rows().enumerate() {
        if let Some((j, w)) = row
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= 0.0 && **w <= INF))
        {
            return Err(Error::InvalidEntry(format!("distance ({i}, {j}) = {w}")));
        }
    }
    Ok(m)
}

pub fn decode_paths(bytes: &[u8]) -> Result<PathMatrix> {
    let m: PathMatrix = decode(bytes)?;
    let n = m.n() as i32;
    for (i, row) in m.rows().enumerate() {
        if let Some((j, v)) = row
            .iter()
            .enumerate()
            .find(|(_, v)| **v != NO_INTERMEDIATE && !(0..n).contains(*v))
        {
            return Err(Error::InvalidEntry(format!("path ({i}, {j}) = {v}")));
        }
    }
    Ok(m)
}

pub fn parse_edge_list(text: &str) -> Result<DistanceMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty edge list".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, m] = fields[..] else {
        return Err(Error::MalformedHeader(format!(
            "line {line}: expected \"n m\", found {header:?}"
        )));
    };
    let n: usize = n
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("line {line}: bad vertex count {n:?}")))?;
    let m: usize = m
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("line {line}: bad edge count {m:?}")))?;
    if n == 0 {
        return Err(Error::MalformedHeader("declared n = 0".into()));
    }

    let mut d = DistanceMatrix::new(n)?;
    let mut seen = 0;
    for (line, text) in lines {
        if seen == m {
            return Err(Error::SizeMismatch(format!(
                "line {line}: more than the declared {m} edges"
            )));
        }
        let parse_err = |msg: String| Error::Parse { line, msg };
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [u, v, w] = fields[..] else {
            return Err(parse_err(format!("expected \"u v w\", found {text:?}")));
        };
        let u: usize = u
            .parse()
            .map_err(|_| parse_err(format!("bad vertex {u:?}")))?;
        let v: usize = v
            .parse()
            .map_err(|_| parse_err(format!("bad vertex {v:?}")))?;
        let w: f32 = w
            .parse()
            .map_err(|_| parse_err(format!("bad weight {w:?}")))?;
        if u >= n || v >= n {
            return Err(parse_err(format!("edge ({u}, {v}) outside 0..{n}")));
        }
        if !(0.0..INF).contains(&w) {
            return Err(parse_err(format!(
                "weight {w} must be finite, non-negative and below INF"
            )));
        }
        d.add_edge(u, v, w);
        seen += 1;
    }
    if seen < m {
        return Err(Error::SizeMismatch(format!(
            "declared {m} edges, found {seen}"
        )));
    }
    Ok(d)
}

pub fn write_edge_list<W: Write>(m: &DistanceMatrix, mut out: W) -> io::Result<()> {
    let n = m.n();
    let edges: Vec<(usize, usize, f32)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && m.get(i, j) < INF)
        .map(|(i, j)| (i, j, m.get(i, j)))
        .collect();
    writeln!(out, "{} {}", n, edges.len())?;
    for (u, v, w) in edges {
        writeln!(out, "{u} {v} {w}")?;
    }
    Ok(())
}

/// Writes `m` in the binary format.
pub fn write_matrix(m: &DistanceMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(m))?;
    Ok(())
}

pub fn write_path_matrix(m: &PathMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(m))?;
    Ok(())
}

/// Reads a distance matrix, accepting either the binary format or a text
/// edge list (told apart by the magic bytes).
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        decode_distances(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::MalformedHeader("neither FWM1 binary nor UTF-8 text".into()))?;
        parse_edge_list(&text)
    }
}

pub fn read_path_matrix(path: impl AsRef<Path>) -> Result<PathMatrix> {
    decode_paths(&fs::read(path)?)
}
