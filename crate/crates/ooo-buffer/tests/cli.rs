//! End-to-end runs of the `oooeval` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oooeval(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oooeval"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = oooeval(args, dir);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str], dir: &Path) -> String {
    let out = oooeval(args, dir);
    assert!(
        !out.status.success(),
        "command {args:?} unexpectedly passed"
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SPEC: &str =
    "producers=3\nsession_s=20\ninterval=constant:100\ndelay=uniform:10:300\nseed=5\n";

fn small_dataset(dir: &Path, name: &str, seed: u64) -> String {
    let spec_path = dir.join(format!("{name}.spec"));
    fs::write(&spec_path, SPEC.replace("seed=5", &format!("seed={seed}"))).unwrap();
    let out = format!("{name}.csv");
    ok(
        &["gen", "--spec", spec_path.to_str().unwrap(), "--out", &out],
        dir,
    );
    out
}

#[test]
fn gen_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = small_dataset(dir.path(), "ds", 5);
    let csv = fs::read_to_string(dir.path().join(&dataset)).unwrap();
    assert_eq!(csv.lines().count(), 601); // header + 3 producers x 200 events
    assert!(csv.starts_with("producer_id,seq_id,dt,cst,srect,srest,crt,payload_bytes"));

    let stdout = ok(&["analyze", "--dataset", &dataset], dir.path());
    assert!(stdout.starts_with("events,clients,ooo_by_dt,ooo_pct,"));
    let row = stdout.lines().nth(1).unwrap();
    assert!(row.starts_with("600,3,"));
}

#[test]
fn gen_seed_override_changes_delays() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("w.spec");
    fs::write(&spec_path, SPEC).unwrap();
    for seed in ["1", "2"] {
        ok(
            &[
                "gen",
                "--spec",
                spec_path.to_str().unwrap(),
                "--seed",
                seed,
                "--out",
                &format!("s{seed}.csv"),
            ],
            dir.path(),
        );
    }
    let a = fs::read_to_string(dir.path().join("s1.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("s2.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn replay_writes_logs_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = small_dataset(dir.path(), "ds", 5);
    ok(
        &[
            "replay",
            "--dataset",
            &dataset,
            "--algo",
            "bsttda",
            "--param",
            "offset_ms=200",
            "--out",
            "run",
        ],
        dir.path(),
    );
    let emissions = fs::read_to_string(dir.path().join("run/emissions.csv")).unwrap();
    assert_eq!(emissions.lines().count(), 601);
    let series = fs::read_to_string(dir.path().join("run/buffer_series.csv")).unwrap();
    assert_eq!(series.lines().count(), 601);
    assert!(series.starts_with("event_index,srect,buffer_ms"));
    let metrics = fs::read_to_string(dir.path().join("run/metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
    assert!(metrics.contains("offset_ms=200"));
}

#[test]
fn grid_covers_every_pair_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = small_dataset(dir.path(), "a", 5);
    let b = small_dataset(dir.path(), "b", 6);
    for out in ["m1.csv", "m2.csv"] {
        ok(
            &["grid", "--dataset", &a, "--dataset", &b, "--out", out],
            dir.path(),
        );
    }
    let m1 = fs::read(dir.path().join("m1.csv")).unwrap();
    let m2 = fs::read(dir.path().join("m2.csv")).unwrap();
    assert_eq!(m1, m2);
    let text = String::from_utf8(m1).unwrap();
    assert_eq!(text.lines().count(), 15); // header + 2 datasets x 7 algorithms
}

#[test]
fn sweep_emits_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = small_dataset(dir.path(), "ds", 5);
    ok(
        &[
            "sweep",
            "--dataset",
            &dataset,
            "--algo",
            "sba",
            "--param",
            "static_buffer_ms",
            "--values",
            "50,150,400",
            "--out",
            "sweep.csv",
        ],
        dir.path(),
    );
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn suggest_lists_every_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = small_dataset(dir.path(), "ds", 5);
    let stdout = ok(&["suggest", "--dataset", &dataset], dir.path());
    for name in ["sba", "bstt", "bsttwa", "bsttd", "bsttda", "bskf", "kslack"] {
        assert!(
            stdout.lines().any(|l| l.starts_with(name)),
            "{name} missing"
        );
    }
}

#[test]
fn column_mapping_reads_foreign_headers() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("foreign.csv"),
        "node,sid,detected,sent,received,responded,confirmed,size\n\
         a,1,10,10,40,40,40,0\n\
         a,2,20,20,55,55,55,0\n",
    )
    .unwrap();
    let stdout = ok(
        &[
            "analyze",
            "--dataset",
            "foreign.csv",
            "--map",
            "producer_id=node,seq_id=sid,dt=detected,cst=sent,srect=received,\
             srest=responded,crt=confirmed,payload_bytes=size",
        ],
        dir.path(),
    );
    assert!(stdout.lines().nth(1).unwrap().starts_with("2,1,"));
}

#[test]
fn validation_failures_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = small_dataset(dir.path(), "ds", 5);

    let err = fails(&["gen", "--out", "x.csv"], dir.path());
    assert!(err.contains("--preset") || err.contains("--spec"));

    let err = fails(
        &[
            "replay",
            "--dataset",
            &dataset,
            "--algo",
            "nope",
            "--out",
            "r",
        ],
        dir.path(),
    );
    assert!(err.contains("nope"));

    let err = fails(&["analyze", "--dataset", "missing.csv"], dir.path());
    assert!(err.contains("missing.csv"));

    let err = fails(
        &[
            "replay",
            "--dataset",
            &dataset,
            "--algo",
            "sba",
            "--param",
            "bogus=1",
            "--out",
            "r",
        ],
        dir.path(),
    );
    assert!(err.contains("bogus"));

    let err = fails(
        &[
            "sweep",
            "--dataset",
            &dataset,
            "--algo",
            "sba",
            "--param",
            "window_n",
            "--values",
            "1,2",
            "--out",
            "s.csv",
        ],
        dir.path(),
    );
    assert!(err.contains("window_n"));
}
