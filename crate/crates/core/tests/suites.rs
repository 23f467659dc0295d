use subsig_core::config::ConfigFile;
use subsig_core::suites::{run_suite, Mode, Report, RunConfig, Suite};
use subsig_core::Error;

fn config(text: &str) -> subsig_core::Result<RunConfig> {
    RunConfig::from_file(&ConfigFile::parse(text)?, None)
}

#[test]
fn config_file_round_trip() {
    let cfg = config("suite = density-even\nn = 4\nk = 2\nangles = 0.9, 2.3\nseed = 5\n").unwrap();
    let r = run_suite(&cfg).unwrap();
    assert!(r.passed);
    assert_eq!(r.trials.len(), 1);
    assert_eq!(r.seed, 5);
    let t = &r.trials[0];
    let expect = -1.0 / 0.45f64.tan();
    assert!((t.values["lhs_im"] - expect).abs() < 1e-12, "{t:?}");
}

#[test]
fn malformed_configs_report_their_line() {
    let line = |text: &str| match config(text) {
        Err(Error::Config { line, .. }) => line,
        other => panic!("{other:?}"),
    };
    assert_eq!(line("suite = density-even\nn = 4\nk = two\n"), 3);
    assert_eq!(line("suite = density-even\n\nmode = quantum\n"), 3);
    assert_eq!(line("suite = lemma-3.11\ntheta = 1\n"), 2);
    assert_eq!(line("n = 4\n"), 0);
}

#[test]
fn wrong_angle_count_is_a_usage_error() {
    let cfg = config("suite = density-even\nn = 4\nk = 2\nangles = 0.9\n").unwrap();
    assert!(matches!(run_suite(&cfg), Err(Error::Usage(_))));
}

#[test]
fn narrowing_parameters_reproduces_trials() {
    let mut wide = RunConfig::new(Suite::DensityEven);
    wide.trials = Some(3);
    let mut narrow = wide.clone();
    narrow.n = Some(4);
    narrow.k = Some(2);
    let w = run_suite(&wide).unwrap();
    let n = run_suite(&narrow).unwrap();
    for t in &n.trials {
        let same = w.trials.iter().find(|x| x.label == t.label).expect("label present");
        assert_eq!(same.values, t.values);
    }
}

#[test]
fn failing_suite_is_reported_not_raised() {
    let mut cfg = RunConfig::new(Suite::DensityOdd);
    cfg.n = Some(3);
    cfg.k = Some(0);
    cfg.trials = Some(2);
    let r = run_suite(&cfg).unwrap();
    assert!(!r.passed);
    assert_eq!(r.failures, 2);
    let json = r.to_json();
    assert_eq!(Report::from_json(&json).unwrap(), r);
}

#[test]
fn exact_and_float_modes() {
    let mut cfg = RunConfig::new(Suite::Supertrace);
    cfg.n = Some(3);
    cfg.trials = Some(20);
    let exact = run_suite(&cfg).unwrap();
    assert!(exact.passed && exact.max_error.is_none());
    cfg.mode = Some(Mode::Float);
    let float = run_suite(&cfg).unwrap();
    assert!(float.passed && float.max_error.unwrap() < 1e-12);
    cfg.mode = Some(Mode::Nilpotent);
    assert!(matches!(run_suite(&cfg), Err(Error::Usage(_))));
}
