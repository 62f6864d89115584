use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_structperf"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path) {
    let o = run(dir, &["gen-synth", "--n", "1000", "--dim", "10", "--pos-fraction", "0.05", "--seed", "7", "--out", "d.svm"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn synth_then_train_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = run(dir.path(), &["train", "--solver", "1pmb", "--loss", "pauc", "--beta", "0.1", "--train-file", "d.svm"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("wall_clock_ms,epoch,train_surrogate,test_measure"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    // 700 training points, buffer 500, 5 passes.
    assert_eq!(rows.len(), 8);
    assert!(rows.windows(2).all(|r| r[0][1] < r[1][1] && r[0][0] <= r[1][0]));
}

#[test]
fn every_solver_and_loss_runs() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    for solver in ["1pmb", "2pmb", "psg", "ftrl"] {
        for loss in ["preck", "prbep", "pauc", "fmeasure"] {
            let o = run(
                dir.path(),
                &["train", "--solver", solver, "--loss", loss, "--buffer", "100", "--passes", "2", "--train-file", "d.svm", "--out", "t.csv"],
            );
            assert_eq!(o.status.code(), Some(0), "{solver}/{loss}: {}", stderr(&o));
        }
    }
}

#[test]
fn model_round_trip_through_eval() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = run(dir.path(), &["train", "--loss", "prbep", "--eta", "20", "--train-file", "d.svm", "--test-file", "d.svm", "--model-out", "m.txt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(dir.path(), &["eval", "--model", "m.txt", "--data", "d.svm", "--loss", "pauc"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("pauc="));
}

#[test]
fn invalid_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["train", "--loss", "pauc", "--beta", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--beta"), "{}", stderr(&o));
    assert_eq!(run(dir.path(), &["train", "--solver", "sgd", "--train-file", "x"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["gen-synth", "--n", "5", "--dim", "2", "--pos-fraction", "0.1", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn bad_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["train", "--train-file", "missing.svm"]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.svm"), "+1 1:1\n-1 2:1 2:3\n").unwrap();
    let o = run(dir.path(), &["train", "--train-file", "bad.svm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--trials", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
