use std::process::Command;

use qbc_harness::output::TranscriptRecord;
use qbc_harness::{read_csv, sig6, write_rows, Format, ResultRow, CSV_HEADER};

fn qbc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qbc"))
        .args(args)
        .output()
        .expect("run qbc")
}

#[test]
fn csv_is_byte_identical_across_runs_and_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for jobs in ["1", "3", "1"] {
        let path = dir.path().join(format!("out-{jobs}-{}.csv", outputs.len()));
        let out = qbc(&[
            "--alice",
            "basis-flip",
            "--m",
            "2",
            "--n",
            "4",
            "--p",
            "8",
            "--q",
            "8",
            "--trials",
            "3000",
            "--seed",
            "7",
            "--sweep",
            "m=1,2,3",
            "--jobs",
            jobs,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), 4);

    let single = qbc(&[
        "--alice",
        "basis-flip",
        "--m",
        "2",
        "--n",
        "4",
        "--p",
        "8",
        "--q",
        "8",
        "--trials",
        "3000",
        "--seed",
        "7",
        "--sweep",
        "m=1,2,3",
        "--single-thread",
    ]);
    assert_eq!(single.stdout, outputs[0]);
}

#[test]
fn exit_codes() {
    assert_eq!(qbc(&["--m", "40", "--trials", "10"]).status.code(), Some(1));
    assert_eq!(qbc(&["--alice", "nonsense"]).status.code(), Some(1));
    assert_eq!(
        qbc(&["--protocol", "p", "--alice", "zeta-prime", "--trials", "10"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(qbc(&["--sweep", "w=1"]).status.code(), Some(1));
    assert_eq!(qbc(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(qbc(&["--trials", "0"]).status.code(), Some(1));
    let bad_path = qbc(&["--trials", "10", "--output", "/nonexistent-dir/out.csv"]);
    assert_eq!(bad_path.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_path.stderr).contains("/nonexistent-dir/out.csv"));
    assert_eq!(qbc(&["--help"]).status.code(), Some(0));
}

#[test]
fn text_format_mirrors_rows() {
    let out = qbc(&[
        "--protocol",
        "pprime",
        "--alice",
        "zeta-prime",
        "--trials",
        "500",
        "--format",
        "text",
    ]);
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let row: ResultRow = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(row.alice, "zeta-prime");
    assert!(row.lambda.is_some());
    assert_eq!(row.ms, None);
}

#[test]
fn timing_fills_the_ms_column_only_on_request() {
    let out = qbc(&["--trials", "200", "--timing"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = read_csv(text.as_bytes()).unwrap();
    assert!(rows[0].ms.is_some());
}

fn sample_row(accept: f64, lambda: Option<f64>) -> ResultRow {
    ResultRow {
        protocol: "p".into(),
        alice: "zeta-p".into(),
        bob: "honest".into(),
        m: 4,
        n: 16,
        p: 64,
        q: 64,
        trials: 100_000,
        seed: 3,
        accept,
        stderr: (accept * (1.0 - accept) / 1e5).sqrt(),
        beta0: lambda,
        beta1: lambda.map(|l| l * 1.7),
        lambda,
        reject_mixing: 1,
        reject_unmarked: 2,
        reject_outcome: 3,
        reject_crosscheck: 4,
        ms: None,
    }
}

#[test]
fn empty_and_single_row_csv() {
    let mut buf = Vec::new();
    write_rows(&[], Format::Csv, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        format!("{}\n", CSV_HEADER.join(","))
    );

    let mut buf = Vec::new();
    write_rows(&[sample_row(0.0625, None)], Format::Csv, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("p,zeta-p,honest,4,16,64,64,100000,3,0.0625,"));
}

#[test]
fn csv_round_trip_at_six_digits() {
    let rows: Vec<ResultRow> = [0.0625, 1.0 / 3.0, 0.123456789, 0.99999951, 1e-7 / 3.0]
        .iter()
        .map(|&a| sample_row(a, Some(a / 2.0)))
        .collect();
    let mut buf = Vec::new();
    write_rows(&rows, Format::Csv, &mut buf).unwrap();
    let parsed = read_csv(buf.as_slice()).unwrap();
    assert_eq!(parsed.len(), rows.len());
    for (a, b) in rows.iter().zip(&parsed) {
        assert_eq!(sig6(a.accept), sig6(b.accept));
        assert_eq!(sig6(a.stderr), sig6(b.stderr));
        assert_eq!(a.lambda.map(sig6), b.lambda.map(sig6));
        assert_eq!(a.beta1.map(sig6), b.beta1.map(sig6));
        assert_eq!(
            (a.m, a.trials, a.reject_crosscheck),
            (b.m, b.trials, b.reject_crosscheck)
        );
    }
    let mut again = Vec::new();
    write_rows(&parsed, Format::Csv, &mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn transcripts_record_every_field() {
    let dir = tempfile::tempdir().unwrap();
    for protocol in ["p", "pprime"] {
        let path = dir.path().join(format!("{protocol}.jsonl"));
        let out = qbc(&[
            "--protocol",
            protocol,
            "--trials",
            "50",
            "--transcripts",
            path.to_str().unwrap(),
            "--output",
            dir.path().join("rows.csv").to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 50);
        for line in text.lines() {
            let value: serde_json::Value = serde_json::from_str(line).unwrap();
            for key in ["params", "R_B", "eta", "P", "x", "R_x", "Q", "b", "result", "Pi"] {
                assert!(value.get(key).is_some(), "{key} missing in {line}");
            }
            let rec: TranscriptRecord = serde_json::from_str(line).unwrap();
            rec.check().unwrap();
            if rec.result == "accept" {
                assert_eq!(rec.pi.is_some(), protocol == "pprime");
                assert_eq!(rec.q.is_some(), protocol == "p");
            }
        }
    }
    let refused = qbc(&[
        "--alice",
        "basis-flip",
        "--trials",
        "5",
        "--transcripts",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(refused.status.code(), Some(1));
}
