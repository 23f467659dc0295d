//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 9 includes the odd case with `k = 0`, where the two sides
//! differ by a constant factor (`1` against `-√-1`) for every angle. That
//! line is expected to print FAIL; the process fails on any other FAIL, and
//! also if the expected failure ever starts passing.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use subsig_core::suites::{run_suite, Mode, Report, RunConfig, Suite};

/// Criteria that cannot hold as stated.
const EXPECTED_FAILURES: &[u32] = &[9];

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn timed(cfg: &RunConfig) -> (Report, Duration) {
    let start = Instant::now();
    let report = run_suite(cfg).unwrap_or_else(|e| panic!("{} did not run: {e}", cfg.suite));
    (report, start.elapsed())
}

fn suite_line(id: u32, title: &'static str, cfg: RunConfig, limit: Option<Duration>) -> Line {
    let (r, took) = timed(&cfg);
    let within = limit.is_none_or(|l| took <= l);
    let worst = r.max_error.map_or_else(|| "exact".to_string(), |e| format!("max error {e:.2e} (tol {:.0e})", r.tolerance));
    let limit_text = limit.map(|l| format!(", limit {} s", l.as_secs())).unwrap_or_default();
    let mut detail = format!(
        "{}/{} trials, {worst}, {:.2} s{limit_text}",
        r.trials.len() - r.failures,
        r.trials.len(),
        took.as_secs_f64()
    );
    let mut failing: Vec<&str> = r.trials.iter().filter(|t| !t.pass).map(|t| t.label.as_str()).collect();
    failing.dedup_by(|a, b| a.rsplit_once(" #").map(|x| x.0) == b.rsplit_once(" #").map(|x| x.0));
    if !failing.is_empty() {
        let groups: Vec<&str> = failing.iter().map(|l| l.rsplit_once(" #").map_or(*l, |x| x.0)).collect();
        detail.push_str(&format!("; failing: {}", groups.join(", ")));
    }
    Line { id, title, pass: r.passed && within, detail }
}

fn with(suite: Suite, f: impl FnOnce(&mut RunConfig)) -> RunConfig {
    let mut cfg = RunConfig::new(suite);
    f(&mut cfg);
    cfg
}

fn determinism() -> Line {
    let configs = [
        with(Suite::DensityEven, |c| {
            c.seed = 11;
            c.trials = Some(10);
        }),
        with(Suite::DensityEven, |c| {
            c.seed = 11;
            c.trials = Some(5);
            c.mode = Some(Mode::Nilpotent);
        }),
        with(Suite::Supertrace, |c| {
            c.seed = 3;
            c.trials = Some(40);
        }),
        with(Suite::Berezin, |c| c.trials = Some(10)),
    ];
    let mut checked = 0;
    let mut pass = true;
    for cfg in &configs {
        let mut outputs = Vec::new();
        for threads in [1, 4, 4] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("pool");
            outputs.push(pool.install(|| run_suite(cfg).expect("runs").to_json()));
        }
        checked += 1;
        pass &= outputs.windows(2).all(|w| w[0] == w[1]);
    }
    Line {
        id: 11,
        title: "byte-identical reports",
        pass,
        detail: format!("{checked} configurations, each run on 1, 4 and 4 threads"),
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let lines = vec![
        suite_line(1, "Clifford relations", RunConfig::new(Suite::CliffordRelations), Some(secs(1))),
        suite_line(2, "supertrace against the ΛV oracle", RunConfig::new(Suite::Supertrace), Some(secs(30))),
        suite_line(3, "τ^2 sign", RunConfig::new(Suite::TauSquare), None),
        suite_line(4, "rotation lift against pullback", RunConfig::new(Suite::RotationLift), None),
        suite_line(5, "lift symbol expansion, n = 4", with(Suite::LiftExpansion, |c| c.n = Some(4)), None),
        suite_line(6, "Berezin coefficient identity", RunConfig::new(Suite::Berezin), Some(secs(60))),
        suite_line(7, "characteristic forms, two paths", RunConfig::new(Suite::CharForms), None),
        suite_line(8, "even density at isolated fixed points", RunConfig::new(Suite::DensityEven), Some(secs(120))),
        suite_line(9, "odd density", RunConfig::new(Suite::DensityOdd), None),
        suite_line(10, "oscillator trace oracle", RunConfig::new(Suite::MehlerOracle), Some(secs(120))),
        determinism(),
    ];
    let mut unexpected = 0;
    for l in &lines {
        let expected_fail = EXPECTED_FAILURES.contains(&l.id);
        let tag = match (l.pass, expected_fail) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => "FAIL",
            (true, true) => "PASS (expected to fail)",
        };
        if l.pass == expected_fail {
            unexpected += 1;
        }
        println!("{tag:<26} [{:>2}] {}: {}", l.id, l.title, l.detail);
    }
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("{passed}/{} criteria pass; {unexpected} unexpected outcome(s)", lines.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
