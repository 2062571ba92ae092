//! Acceptance criteria 1-10, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

use std::process::Command;
use std::time::Instant;

use haarint_cli::suites::{run_suite, SuiteOptions, DEFAULT_SEED};

struct Outcome {
    passed: bool,
    detail: String,
}

type Check = Box<dyn Fn() -> Outcome>;

fn suite(name: &str) -> Outcome {
    match run_suite(name, &SuiteOptions::new(DEFAULT_SEED)) {
        Ok(report) => {
            let failed: Vec<String> =
                report.failed_gates().map(|(q, g)| format!("{q}: {} observed {:?}", g.name, g.observed)).collect();
            let gates: usize = report.reports.iter().map(|r| r.gates.len()).sum();
            Outcome {
                passed: report.passed,
                detail: if failed.is_empty() { format!("{gates} gates") } else { failed.join("; ") },
            }
        }
        Err(e) => Outcome { passed: false, detail: format!("error: {e}") },
    }
}

fn compare_bytes(suite: &str, threads: &str, samples: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_haarint"))
        .args(["compare", "--suite", suite, "--seed", "7", "--samples", samples])
        .env("HAARINT_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn reproducibility() -> Outcome {
    let mut notes = vec![];
    let mut passed = true;
    for (suite, samples) in [("moments", "200000"), ("quartic-saddle", "200000")] {
        let runs: Result<Vec<Vec<u8>>, String> =
            ["1", "4", "4", "3"].iter().map(|t| compare_bytes(suite, t, samples)).collect();
        match runs {
            Ok(r) => {
                let same = r.windows(2).all(|w| w[0] == w[1]);
                passed &= same;
                notes.push(format!("{suite}: {} bytes x {} runs {}", r[0].len(), r.len(), if same { "identical" } else { "DIFFER" }));
            }
            Err(e) => {
                passed = false;
                notes.push(format!("{suite}: {e}"));
            }
        }
    }
    Outcome { passed, detail: notes.join("; ") }
}

fn main() {
    let criteria: Vec<(&str, Check)> = vec![
        ("normalization exactness", Box::new(|| suite("normalization"))),
        ("elementary moments", Box::new(|| suite("moments"))),
        ("exponential example", Box::new(|| suite("q1-exponential"))),
        ("linear saddle", Box::new(|| suite("linear-saddle"))),
        ("quartic saddle", Box::new(|| suite("quartic-saddle"))),
        ("threshold", Box::new(|| suite("quartic-threshold"))),
        ("h-function", Box::new(|| suite("h-function"))),
        ("determinant identities", Box::new(|| suite("determinants"))),
        ("gradient oracle", Box::new(|| suite("gradient"))),
        ("reproducibility", Box::new(reproducibility)),
    ];
    let mut failures = 0;
    for (k, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        failures += usize::from(!o.passed);
        println!("criterion {:>2} {verdict} {title} ({:.1}s): {}", k + 1, start.elapsed().as_secs_f64(), o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
