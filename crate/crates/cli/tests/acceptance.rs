//! Acceptance run: one line per criterion, exit status 1 if any fails.

use calderon_core::pipeline::{parse_config, run_verification_suite};
use serde_json::{json, Value};
use std::process::Command;
use std::time::{Duration, Instant};

struct Line {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

/// Run `check` for every config in the grid; returns (all passed, worst error, first failure).
fn run_grid(check: &str, grid: &[Value]) -> (bool, f64, Option<String>) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for extra in grid {
        let mut cfg = json!({ "checks": [check] });
        for (k, v) in extra.as_object().unwrap() {
            cfg[k] = v.clone();
        }
        let rep = match parse_config(&cfg.to_string()).and_then(|c| run_verification_suite(&c)) {
            Ok(r) => r,
            Err(e) => {
                ok = false;
                failure.get_or_insert(format!("{extra}: {e}"));
                continue;
            }
        };
        for c in &rep.checks {
            worst = worst.max(c.max_error);
            if !c.passed() {
                ok = false;
                failure.get_or_insert(format!("{extra}: {}", c.witness));
            }
        }
    }
    (ok, worst, failure)
}

fn grid_line(id: usize, title: &'static str, budget_s: u64, check: &str, grid: Vec<Value>) -> Line {
    let start = Instant::now();
    let (pass, worst, failure) = run_grid(check, &grid);
    let detail = match failure {
        Some(f) => f,
        None => format!("{} configs, max error {worst:.2e}", grid.len()),
    };
    Line { id, title, pass, detail, elapsed: start.elapsed(), budget: Duration::from_secs(budget_s) }
}

fn ns(range: std::ops::RangeInclusive<usize>, extra: Value) -> Vec<Value> {
    range
        .map(|n| {
            let mut v = extra.clone();
            v["n"] = json!(n);
            v
        })
        .collect()
}

fn cli_determinism() -> Line {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_calderon");
    let dir = std::env::temp_dir().join(format!("calderon-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    let out = dir.join("report.json");
    std::fs::write(&cfg, r#"{"n": 2, "N": 8, "seed": 42}"#).unwrap();
    let mut reports = Vec::new();
    let mut codes = Vec::new();
    for _ in 0..2 {
        let o = Command::new(bin).args(["--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]).output().unwrap();
        codes.push(o.status.code());
        let text = std::fs::read_to_string(&out).unwrap_or_default();
        reports.push(text.lines().filter(|l| !l.contains("\"runtime_ms\"")).collect::<Vec<_>>().join("\n"));
    }
    std::fs::write(&cfg, r#"{"b": {"re": [[1, 0, 0]]}}"#).unwrap();
    let bad = Command::new(bin).args(["--config", cfg.to_str().unwrap()]).output().unwrap().status.code();
    let failing = Command::new(bin)
        .args(["--check", "ladder_oscillator", "--tolerance", "1e-30", "--output", out.to_str().unwrap()])
        .output()
        .unwrap()
        .status
        .code();
    let _ = std::fs::remove_dir_all(&dir);
    let same = reports[0] == reports[1] && !reports[0].is_empty();
    let pass = same && codes == [Some(0), Some(0)] && bad == Some(2) && failing == Some(1);
    Line {
        id: 12,
        title: "CLI determinism and exit codes",
        pass,
        detail: format!("identical={same} exit(pass)={codes:?} exit(config)={bad:?} exit(fail)={failing:?}"),
        elapsed: start.elapsed(),
        budget: Duration::from_secs(5),
    }
}

fn main() {
    let lines = vec![
        grid_line(1, "fiber identities, n-1 <= 6", 1, "fiber_identities", ns(2..=7, json!({ "r": 2 }))),
        grid_line(2, "tangential Dirac symbol squared", 1, "dd_square", ns(2..=5, json!({}))),
        grid_line(3, "Calderon principal symbol", 5, "calderon_principal", ns(2..=4, json!({}))),
        grid_line(
            4,
            "order -1 term and contact contour integrals",
            10,
            "subprincipal_contour",
            ns(2..=4, json!({ "b": { "re": [["1/2", 0], [0, "-3"]], "im": [[0, "2/7"], ["2/7", 0]] } }))
                .into_iter()
                .map(|mut v| {
                    // the fixed b only fits n = 2; larger n use the seeded samples
                    if v["n"] != json!(2) {
                        v.as_object_mut().unwrap().remove("b");
                    }
                    v
                })
                .collect(),
        ),
        grid_line(5, "order audit of lower-order term shapes", 1, "order_audit", vec![json!({})]),
        grid_line(6, "classical ellipticity", 5, "classical_ellipticity", ns(2..=4, json!({ "seed": 1 }))),
        grid_line(7, "quantization of the twisted product", 30, "quantization_product", ns(2..=3, json!({ "N": 14 }))),
        grid_line(8, "ladder operators and oscillator", 5, "ladder_oscillator", ns(2..=4, json!({ "N": 12 }))),
        grid_line(9, "model Dirac squares", 5, "dirac_square", ns(2..=4, json!({ "N": 12 }))),
        grid_line(10, "classical model inverses", 60, "model_inverse_classical", ns(2..=3, json!({ "N": 12 }))),
        grid_line(11, "generalized Szego projectors and inverses", 60, "generalized_szego", ns(2..=3, json!({ "N": 12, "tau": [0.5, 1, 2] }))),
        cli_determinism(),
    ];
    let mut failed = 0;
    for l in &lines {
        let in_time = l.elapsed <= l.budget;
        let ok = l.pass && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {:<44} {:>8.2}s / {:>3}s  {}",
            l.id,
            if ok { "PASS" } else { "FAIL" },
            l.title,
            l.elapsed.as_secs_f64(),
            l.budget.as_secs(),
            if in_time { l.detail.clone() } else { format!("over time budget; {}", l.detail) }
        );
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
