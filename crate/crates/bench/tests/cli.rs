use std::fs;
use std::process::{Command, Output};

use apsp_bench::{parse_csv, CSV_HEADER};

fn apsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apsp"))
        .args(args)
        .output()
        .expect("failed to start apsp")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

#[test]
fn run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv");
    let out = apsp(&[
        "run",
        "--n",
        "128",
        "--bs",
        "32",
        "--workers",
        "2",
        "--reps",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(&CSV_HEADER.join(",")));
    assert!(!text.contains('\r'));
    let rows = parse_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].variant, "blocked-parallel");
    assert_eq!(rows[0].bs, Some(32));
    assert_eq!(rows[0].workers, 2);
    assert_eq!(rows[0].verified, "pass");
}

#[test]
fn ladder_reports_every_rung() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ladder.csv");
    let out = apsp(&[
        "run",
        "--ladder",
        "--n",
        "64",
        "--bs",
        "16",
        "--reps",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].variant, "naive");
    assert_eq!(rows[0].bs, None);
    assert!(rows.iter().all(|r| r.verified == "pass"));
}

#[test]
fn sweep_skips_bad_block_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = apsp(&[
        "sweep-bs",
        "--variant",
        "blocked-serial",
        "--n",
        "128",
        "--bs",
        "16,48,64",
        "--reps",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(fs::File::open(&csv).unwrap()).unwrap();
    let sizes: Vec<_> = rows.iter().map(|r| r.bs).collect();
    assert_eq!(sizes, vec![Some(16), Some(64)]);
}

#[test]
fn config_errors_exit_2() {
    let out = apsp(&["run", "--n", "100", "--bs", "64"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
    assert_eq!(code(&apsp(&["run", "--kernel", "avx"])), 2);
}

#[test]
fn io_errors_exit_3() {
    let out = apsp(&["verify", "--input", "/nonexistent/graph.bin"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn gen_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["g.bin", "g.txt"] {
        let path = dir.path().join(name);
        let path = path.to_str().unwrap();
        let out = apsp(&["gen", "--n", "64", "--p", "0.2", "--out", path]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let out = apsp(&["verify", "--input", path, "--bs", "16", "--workers", "4"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
}
