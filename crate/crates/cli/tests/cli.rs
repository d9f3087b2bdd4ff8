use std::path::Path;
use std::process::{Command, Output};

fn nistest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nistest")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_csv(path: &Path, rows: impl Iterator<Item = (f64, f64)>) {
    let mut s = String::from("t,x,y\n");
    for (t, (x, y)) in rows.enumerate() {
        s.push_str(&format!("{},{x},{y}\n", t + 1));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn size_formats() {
    let base = ["size", "--n", "60", "--reps", "40", "--seed", "3"];
    let json = nistest(&[&base[..], &["--format", "json"]].concat());
    assert_eq!(code(&json), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 6);

    let csv = nistest(&[&base[..], &["--format", "csv", "--bw-exp", "1/3"]].concat());
    assert_eq!(code(&csv), 0);
    assert_eq!(stdout(&csv).lines().count(), 3);

    let md = nistest(&[&base[..], &["--format", "markdown"]].concat());
    assert!(stdout(&md).contains("h = n^-1/3"));
}

#[test]
fn output_file_and_seed_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let args = [
        "power", "--n", "80", "--reps", "30", "--r", "0.5", "--eta", "ar", "--lambda", "-0.4", "--nu", "2",
        "--bw-exp", "0.3", "--bw-exp", "1/2.5", "--format", "json",
    ];
    let o = nistest(&[&args[..], &["--out", out.to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0);
    let a: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&nistest(&args))).unwrap();
    assert_eq!(a["cells"], b["cells"]);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&nistest(&["size", "--bogus"])), 1);
    assert_eq!(code(&nistest(&["power", "--eta", "ar", "--lambda", "1", "--reps", "5"])), 1);
    assert_eq!(code(&nistest(&["reproduce", "--table", "7"])), 1);
    assert_eq!(code(&nistest(&["size", "--bw-exp", "x/y"])), 1);
    assert_eq!(code(&nistest(&["size", "--kernel", "triweight"])), 1);
    assert_eq!(code(&nistest(&["--help"])), 0);
}

#[test]
fn test_command_on_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    write_csv(&good, (0..200).map(|i| {
        let x = (i as f64 * 0.37).sin() * 5.0 + i as f64 * 0.05;
        (x, 1.0 + 0.5 * x + ((i * 7919 % 101) as f64 / 101.0 - 0.5))
    }));
    let o = nistest(&["test", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["result"]["z"].as_f64().unwrap().is_finite());

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,x,y\n1,1,2\n2,abc,3\n").unwrap();
    let o = nistest(&["test", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2") && err.contains('x'), "{err}");

    assert_eq!(code(&nistest(&["test", dir.path().join("missing.csv").to_str().unwrap()])), 2);

    // no two regressor values fall inside one uniform window, so V² = 0
    let sparse = dir.path().join("sparse.csv");
    write_csv(&sparse, (0..20).map(|i| (i as f64 * 10.0, (i % 3) as f64)));
    let o = nistest(&["test", sparse.to_str().unwrap(), "--kernel", "uniform", "--h", "0.01"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn reproduce_with_few_replications_misses_tolerance() {
    let o = nistest(&["reproduce", "--table", "1", "--reps", "10", "--format", "csv"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("FAIL") || stdout(&o).contains("false"));
}

#[test]
fn localtime_demo_csv() {
    let o = nistest(&["localtime-demo", "--n", "200,400", "--seeds", "2", "--m", "2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "section,n,seed,epsilon,value");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|l| l.starts_with("sup_discrepancy,200,")));
    assert!(rows.iter().any(|l| l.starts_with("window_sensitivity,")));
}
