//! The command-line front end: exit codes, outputs, and byte-identical
//! reruns across thread counts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_onebit-rof");

/// Small enough to train in a few seconds.
const TINY: &str = r#"
seed = 5

[training]
epochs = 3
batch = 20
steps_per_epoch = 2

[experiments]
test_size = 200
dither_grid = { count = 4, lo_db = 0.0, hi_db = 15.0 }
snr_grid = { count = 3, lo_db = 0.0, hi_db = 50.0 }
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn tiny_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny.toml"), TINY).unwrap();
    dir
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["selftest"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().count() >= 8);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[training]\nepochs = -3\n").unwrap();
    let out = run(dir.path(), &["--config", "bad.toml", "selftest"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epochs"));

    fs::write(dir.path().join("bad.toml"), "[experiments]\ntest_size = 0\n").unwrap();
    let out = run(dir.path(), &["--config", "bad.toml", "blmmse"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("experiments.test_size"));

    let out = run(dir.path(), &["sweep-snr", "--scenario", "nonsense", "--ratio-db", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--scenario"));

    // no dither table to take the ratio from
    let out = run(dir.path(), &["sweep-snr", "--scenario", "all"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dither_sweep_csv"));
}

#[test]
fn dither_sweep_writes_one_row_per_grid_point() {
    let dir = tiny_dir();
    let out = run(dir.path(), &["--config", "tiny.toml", "--out", "r", "--emit-plot", "sweep-dither"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("r/dither_sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "sweep_db,nmse_dnn_db,nmse_blmmse_db,n_test,seed,config_hash");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,") && lines[4].starts_with("15,"));
    assert!(lines[1..].iter().all(|l| l.split(',').nth(4) == Some("5")));
    assert!(fs::read_to_string(dir.path().join("r/dither_sweep.svg")).unwrap().starts_with("<svg"));

    // the Es/N0 sweep picks its ratio up from that table
    let out = run(dir.path(), &["--config", "tiny.toml", "--out", "r", "sweep-snr", "--scenario", "all"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["train-M1-test-M2", "train-M1-test-M3", "train-M3-test-M3"] {
        let csv = fs::read_to_string(dir.path().join(format!("r/snr_sweep_{name}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 4, "{name}");
    }
}

fn outputs(dir: &Path, sub: &str) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir.join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tiny_dir();
    for threads in ["1", "2", "3"] {
        let sub = format!("t{threads}");
        let ckpt = format!("{sub}/checkpoint.txt");
        let commands: [&[&str]; 5] = [
            &["sweep-dither"],
            &["sweep-snr", "--scenario", "all"],
            &["train", "--model", "m3", "--ratio-db", "8", "--snr-db", "25"],
            &["evaluate", "--checkpoint", &ckpt, "--model", "m2", "--snr-db", "20"],
            &["blmmse"],
        ];
        for cmd in commands {
            let mut args = vec!["--config", "tiny.toml", "--out", &sub, "--threads", threads];
            args.extend_from_slice(cmd);
            let out = run(dir.path(), &args);
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
    let reference = outputs(dir.path(), "t1");
    assert_eq!(reference.len(), 8, "{:?}", reference.iter().map(|f| &f.0).collect::<Vec<_>>());
    for sub in ["t2", "t3"] {
        assert_eq!(outputs(dir.path(), sub), reference, "{sub}");
    }
}
