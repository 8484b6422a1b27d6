//! CSV and table output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::config::Variant;
use crate::error::{BenchError, Result};
use crate::harness::BenchRecord;

pub const CSV_HEADER: [&str; 10] = [
    "variant",
    "kernel",
    "n",
    "bs",
    "workers",
    "seed",
    "reps",
    "wall_time_s",
    "gflops",
    "verified",
];

/// Kernel and block size do not apply to the naive solver.
const NOT_APPLICABLE: &str = "-";

fn require_records(records: &[BenchRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(BenchError::Config("no records to report".into()));
    }
    Ok(())
}

fn csv_fields(r: &BenchRecord) -> [String; 10] {
    let c = &r.config;
    let blocked = c.variant != Variant::Naive;
    [
        c.variant.to_string(),
        if blocked {
            c.kernel.to_string()
        } else {
            NOT_APPLICABLE.into()
        },
        c.n.to_string(),
        if blocked {
            c.bs.to_string()
        } else {
            NOT_APPLICABLE.into()
        },
        c.effective_workers().to_string(),
        c.seed.to_string(),
        c.reps.to_string(),
        r.wall_time_s.to_string(),
        r.gflops.to_string(),
        r.verified.to_string(),
    ]
}

/// Writes a header line and one row per record, LF-terminated.
pub fn emit_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    require_records(records)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(csv_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    require_records(records)?;
    emit_csv(records, File::create(path)?)
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub variant: String,
    pub kernel: String,
    pub n: usize,
    pub bs: Option<usize>,
    pub workers: usize,
    pub seed: u64,
    pub reps: usize,
    pub wall_time_s: f64,
    pub gflops: f64,
    pub verified: String,
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(BenchError::Config(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let bad = |field: &str, v: &str| BenchError::Config(format!("bad {field} value {v:?}"));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or_default();
        let num = |i: usize| f(i).parse::<f64>().map_err(|_| bad(CSV_HEADER[i], f(i)));
        let int = |i: usize| f(i).parse::<u64>().map_err(|_| bad(CSV_HEADER[i], f(i)));
        rows.push(CsvRow {
            variant: f(0).to_owned(),
            kernel: f(1).to_owned(),
            n: int(2)? as usize,
            bs: if f(3) == NOT_APPLICABLE {
                None
            } else {
                Some(int(3)? as usize)
            },
            workers: int(4)? as usize,
            seed: int(5)?,
            reps: int(6)? as usize,
            wall_time_s: num(7)?,
            gflops: num(8)?,
            verified: f(9).to_owned(),
        });
    }
    Ok(rows)
}

/// An aligned table in the order given, with speedups relative to the
/// first row.
pub fn emit_table(records: &[BenchRecord]) -> Result<String> {
    require_records(records)?;
    let base = records[0].wall_time_s;
    let header = [
        "version", "n", "bs", "workers", "time (s)", "GFLOPS", "speedup", "verified",
    ];
    let rows: Vec<[String; 8]> = records
        .iter()
        .map(|r| {
            let c = &r.config;
            let (version, bs) = match c.variant {
                Variant::Naive => ("naive".to_string(), NOT_APPLICABLE.to_string()),
                v => (format!("{v}/{}", c.kernel), c.bs.to_string()),
            };
            [
                version,
                c.n.to_string(),
                bs,
                c.effective_workers().to_string(),
                format!("{:.4}", r.wall_time_s),
                format!("{:.3}", r.gflops),
                format!("{:.2}x", base / r.wall_time_s),
                r.verified.to_string(),
            ]
        })
        .collect();

    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect::<Vec<_>>()
            .join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    let rule_len = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::harness::{gflops, Verification};
    use apsp_core::KernelVariant;

    fn record(variant: Variant, kernel: KernelVariant, t: f64) -> BenchRecord {
        let config = RunConfig {
            variant,
            kernel,
            n: 1024,
            bs: 64,
            workers: 4,
            ..RunConfig::default()
        };
        BenchRecord {
            gflops: gflops(config.n, t),
            config,
            wall_time_s: t,
            verified: Verification::Pass,
            mismatch: None,
            timestamp: 0,
        }
    }

    #[test]
    fn one_record_is_two_lines() {
        let mut out = Vec::new();
        emit_csv(
            &[record(Variant::BlockedSerial, KernelVariant::Lanes, 0.5)],
            &mut out,
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "variant,kernel,n,bs,workers,seed,reps,wall_time_s,gflops,verified"
        );
        assert!(lines[1].starts_with("blocked-serial,lanes,1024,64,1,42,3,0.5,"));
        assert!(text.ends_with("pass\n") && !text.contains('\r'));
    }

    #[test]
    fn empty_is_a_usage_error() {
        assert!(matches!(
            emit_csv(&[], Vec::new()),
            Err(BenchError::Config(_))
        ));
        assert!(matches!(emit_table(&[]), Err(BenchError::Config(_))));
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![
            record(Variant::Naive, KernelVariant::Scalar, 1.25),
            record(Variant::BlockedParallel, KernelVariant::Lanes, 0.0371),
        ];
        let mut out = Vec::new();
        emit_csv(&recs, &mut out).unwrap();
        let rows = parse_csv(&out[..]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].bs, None);
        assert_eq!(rows[0].kernel, "-");
        assert_eq!(rows[1].workers, 4);
        for (row, rec) in rows.iter().zip(&recs) {
            assert_eq!(row.wall_time_s, rec.wall_time_s);
            assert_eq!(row.gflops, rec.gflops);
        }
    }

    #[test]
    fn ladder_table() {
        let recs = vec![
            record(Variant::Naive, KernelVariant::Scalar, 4.0),
            record(Variant::BlockedSerial, KernelVariant::Scalar, 2.0),
            record(Variant::BlockedSerial, KernelVariant::Lanes, 1.0),
            record(Variant::BlockedParallel, KernelVariant::Lanes, 0.25),
        ];
        let table = emit_table(&recs).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 6, "{table}");
        assert!(lines[0].starts_with("version"));
        assert!(lines[1].chars().all(|c| c == '-'));
        assert!(lines[2].starts_with("naive"));
        assert!(lines[4].starts_with("blocked-serial/lanes") && lines[4].contains("4.00x"));
        assert!(lines[5].starts_with("blocked-parallel/lanes") && lines[5].contains("16.00x"));
        let width = lines[0].len();
        assert!(lines[2..].iter().all(|l| l.len() == width), "{table}");
    }
}
