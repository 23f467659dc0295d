use std::path::Path;
use std::process::{Command, Output};

fn subsig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subsig")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn passing_suite_exits_zero_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = subsig(&["verify", "--suite", "lemma-3.11", "--n", "4", "--trials", "200", "--mode", "exact", "--seed", "7", "--json", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["seed"], 7);
    assert_eq!(json["passed"], true);
    assert_eq!(json["trials"].as_array().unwrap().len(), 201);
    assert!(json.get("wall_time").is_none());
}

#[test]
fn failing_suite_exits_one() {
    let o = subsig(&["verify", "--suite", "density-odd", "--n", "3", "--k", "0", "--trials", "3"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&subsig(&["verify", "--suite", "no-such-suite"])), 2);
    assert_eq!(code(&subsig(&["verify"])), 2);
    assert_eq!(code(&subsig(&["verify", "--suite", "tau-square", "--mode", "float"])), 2);
    assert_eq!(code(&subsig(&["verify", "--suite", "density-even", "--k", "4", "--n", "4"])), 2);
    assert_eq!(code(&subsig(&["verify", "--all", "--n", "4"])), 2);
    assert_eq!(code(&subsig(&["frobnicate"])), 2);
}

#[test]
fn malformed_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fp.cfg");
    std::fs::write(&cfg, "# fixed point\nn = 4\nk = 2\nangles = 0.9; 2.3\n").unwrap();
    let o = subsig(&["density", "--config", path(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("fp.cfg:4:"), "{}", stderr(&o));

    std::fs::write(&cfg, "n = 4\nk 2\n").unwrap();
    let o = subsig(&["density", "--config", path(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("fp.cfg:2:"), "{}", stderr(&o));
}

#[test]
fn density_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fp.cfg");
    let out = dir.path().join("fp.json");
    std::fs::write(&cfg, "n = 4\nk = 2\nangles = 0.9, 2.3\n").unwrap();
    let o = subsig(&["density", "--config", path(&cfg), "--json", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let t = &json["trials"][0];
    let (l, r) = (t["values"]["lhs_im"].as_f64().unwrap(), t["values"]["rhs_im"].as_f64().unwrap());
    assert!((l - r).abs() < 1e-12 && (l + 1.0 / 0.45f64.tan()).abs() < 1e-12);
    assert!(t["error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn odd_density_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("odd.cfg");
    std::fs::write(&cfg, "n = 5\nk = 2\nangles = 0.8, 2.0\n").unwrap();
    let o = subsig(&["density", "--config", path(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("density-odd"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_subsig"))
            .args(["verify", "--suite", "density-even", "--mode", "nilpotent", "--trials", "4", "--seed", "21", "--json", path(&out)])
            .env("SUBSIG_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = run("a.json", "1");
    let b = run("b.json", "3");
    let c = run("c.json", "3");
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn bad_thread_cap_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_subsig"))
        .args(["verify", "--suite", "tau-square"])
        .env("SUBSIG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn mehler_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    // a coarse ladder is still pre-asymptotic, so only the table is checked here
    let o = subsig(&["mehler", "--theta", "0.5", "--time", "0.5", "--spacings", "0.4,0.2", "--csv", path(&csv)]);
    assert!(matches!(code(&o), 0 | 1), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("spacing,fd,closed,error"));
    assert_eq!(lines.count(), 2);
    assert_eq!(code(&subsig(&["mehler", "--spacings", "0.2"])), 2);
}

#[test]
fn report_summarizes_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    assert_eq!(code(&subsig(&["verify", "--suite", "tau-square", "--n", "3", "--json", path(&good)])), 0);
    assert_eq!(code(&subsig(&["verify", "--suite", "density-odd", "--k", "0", "--trials", "1", "--json", path(&bad)])), 1);
    let o = subsig(&["report", path(&good)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("tau-square"));
    let o = subsig(&["report", path(&good), path(&bad)]);
    assert_eq!(code(&o), 1);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&subsig(&["report", path(&bad)])), 2);
}
