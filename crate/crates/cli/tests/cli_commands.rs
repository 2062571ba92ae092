use std::f64::consts::PI;
use std::process::{Command, Output};

use haarint_cli::report::{self, Body};

fn haarint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haarint")).args(args).env("HAARINT_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = haarint(&["compare", "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for name in ["normalization", "q1-exponential", "quartic-threshold", "gradient"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(haarint(&["exact", "--n", "5", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(haarint(&["saddle-quartic", "--n", "5"]).status.code(), Some(2));
    assert_eq!(haarint(&["moment", "--n", "4", "--pattern", "1 2 3"]).status.code(), Some(2));
    assert_eq!(haarint(&["saddle-linear", "--n", "5", "--y", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(haarint(&["sweep-h", "--q-min", "10", "--q-bar", "5"]).status.code(), Some(2));
    assert_eq!(haarint(&["frobnicate"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_haarint"))
        .args(["compare", "--suite", "gradient"])
        .env("HAARINT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_gate_exits_one() {
    // Three coinciding factors at N = 2: the leading pairing count 6/N^3 is
    // far from the exact 1/4.
    let o = haarint(&["moment", "--n", "2", "--pattern", "1 1 1 1; 1 1 1 1; 1 1 1 1", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let out = report::from_json(&stdout(&o)).unwrap();
    let Body::Report(r) = out.body else { panic!("expected a report") };
    assert!(!r.passed);
}

#[test]
fn moment_examples() {
    let o = haarint(&["moment", "--n", "10", "--pattern", "1 1 1 1", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let Body::Report(r) = report::from_json(&stdout(&o)).unwrap().body else { panic!() };
    assert_eq!(r.routes[0].value, Some(0.1));
    assert!(r.comparisons[0].z_score.unwrap() <= 4.0);

    let o = haarint(&["moment", "--n", "4", "--pattern", "1 1 2 1", "--seed", "5"]);
    let Body::Report(r) = report::from_json(&stdout(&o)).unwrap().body else { panic!() };
    assert_eq!(r.routes[1].value, Some(0.0));
    assert_eq!(r.routes[1].status, "exact");
    assert_eq!(r.routes[1].samples, None);
}

#[test]
fn missing_seed_is_generated_and_printed() {
    let o = haarint(&["moment", "--n", "3", "--pattern", "1 1 1 1", "--samples", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stderr(&o).lines().find(|l| l.starts_with("seed: ")).unwrap().to_string();
    let seed: u64 = line["seed: ".len()..].parse().unwrap();
    assert_eq!(report::from_json(&stdout(&o)).unwrap().config.seed, Some(seed));
}

#[test]
fn exact_det_power_row() {
    let o = haarint(&["exact", "--n", "6", "--q", "2", "--seed", "1", "--samples", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let Body::Rows(rows) = report::from_json(&stdout(&o)).unwrap().body else { panic!() };
    let target = PI.powi(4) / 240.0;
    let closed = rows.iter().find(|r| r.route == "closed-form").unwrap();
    assert!((closed.value.unwrap() / target - 1.0).abs() < 1e-12);
    let quad = rows.iter().find(|r| r.route == "ball-quadrature").unwrap();
    assert!((quad.value.unwrap() / target - 1.0).abs() < 1e-6);
    for r in &rows {
        assert_eq!((r.n, r.q), (Some(6), Some(2)));
    }
}

#[test]
fn quartic_at_four_has_no_interior_saddle() {
    let o = haarint(&["saddle-quartic", "--beta", "4", "--n", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let Body::Saddle(t) = report::from_json(&stdout(&o)).unwrap().body else { panic!() };
    assert_eq!(t.rows[0].status, "no-interior-saddle");
    assert_eq!(t.rows[0].value, None);
    assert!(t.saddle.log_asymptotic_value.is_none());
}

#[test]
fn linear_saddle_from_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("y.txt");
    std::fs::write(&path, "2 2\n0.9 0  0.3 0.1\n0.3 -0.1  -0.4 0\n").unwrap();
    let out = dir.path().join("report.json");
    let o = haarint(&["saddle-linear", "--n", "80", "--y", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let Body::Saddle(t) = report::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap().body else { panic!() };
    assert_eq!(t.saddle.q, 2);
    assert!(t.saddle.exponent_per_n > 0.0);
    assert!(t.saddle.gradient_residual <= 1e-10);
}

#[test]
fn sweep_csv_round_trips_and_marks_the_maximum() {
    let o = haarint(&["sweep-h", "--q-min", "10", "--q-bar", "10.5", "--q-max", "30", "--grid", "41"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows = report::read_csv(&text).unwrap();
    let mut again = vec![];
    report::write_csv(&rows, &mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
    let best: Vec<_> = rows.iter().filter(|r| r.is_argmax).collect();
    assert_eq!(best.len(), 1);
    assert_eq!(best[0].q, 10.5);

    // With the cutoff at 30 the slope beyond it is still positive.
    let o = haarint(&["sweep-h", "--q-min", "10", "--q-bar", "30", "--q-max", "60", "--grid", "11"]);
    let rows = report::read_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.iter().find(|r| r.is_argmax).unwrap().q, 60.0);
}

#[test]
fn json_round_trips_exactly() {
    for args in [
        vec!["compare", "--suite", "q1-exponential"],
        vec!["saddle-quartic", "--beta", "8", "--n", "100"],
        vec!["exact", "--n", "12", "--integrand", "exp-linear", "--y", "0.5", "--seed", "4", "--samples", "5000"],
        vec!["sweep-h", "--q-min", "2", "--grid", "5", "--format", "json"],
    ] {
        let o = haarint(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let text = stdout(&o);
        let parsed = report::from_json(&text).unwrap();
        assert_eq!(report::to_json(&parsed).unwrap(), text, "{args:?}");
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["exact", "--n", "9", "--q", "2", "--integrand", "abs-sq", "--seed", "11", "--samples", "20000"];
    let a = haarint(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_haarint")).args(args).env("HAARINT_THREADS", "5").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}
