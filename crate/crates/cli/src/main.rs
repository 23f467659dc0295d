//! `subsig`: run verification suites, evaluate density pairs and the
//! oscillator oracle, and summarize JSON reports.
//!
//! Exit codes: 0 when every trial passes, 1 on a failed check, 2 on bad
//! usage or a malformed config.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use subsig_core::config::ConfigFile;
use subsig_core::suites::{configure_threads, run_mehler, run_suite, Mode, Report, RunConfig, Suite};
use subsig_core::Error;

#[derive(Parser)]
#[command(name = "subsig", version, about = "Checks for the local index density of sub-signature operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite, or all of them.
    Verify(VerifyArgs),
    /// Compare the two density paths for the fixed-point data in a config file.
    Density(DensityArgs),
    /// Finite-difference oscillator trace against its closed form.
    Mehler(MehlerArgs),
    /// Summarize JSON reports written by earlier runs.
    Report(ReportArgs),
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact, float or nilpotent
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "all")]
    suite: Option<String>,
    #[arg(long)]
    all: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MehlerArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    time: Option<f64>,
    /// Comma-separated grid spacings, coarse to fine.
    #[arg(long, value_delimiter = ',')]
    spacings: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the refinement table here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().map_err(Failure::from).and_then(|()| match cli.command {
        Command::Verify(args) => verify(args),
        Command::Density(args) => density(args),
        Command::Mehler(args) => mehler(args),
        Command::Report(args) => report(args),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<ConfigFile, Failure> {
    ConfigFile::read(path).map_err(|e| match e {
        Error::Config { line, msg } => Failure::Usage(format!("{}:{line}: {msg}", path.display())),
        other => other.into(),
    })
}

fn with_path(path: &Path, e: Error) -> Failure {
    match e {
        Error::Config { line, msg } => Failure::Usage(format!("{}:{line}: {msg}", path.display())),
        other => other.into(),
    }
}

fn apply(cfg: &mut RunConfig, c: &Common) -> Result<(), Failure> {
    cfg.n = c.n.or(cfg.n);
    cfg.a = c.a.or(cfg.a);
    cfg.k = c.k.or(cfg.k);
    cfg.trials = c.trials.or(cfg.trials);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    if let Some(m) = &c.mode {
        cfg.mode = Some(m.parse::<Mode>()?);
    }
    cfg.tol = c.tol.or(cfg.tol);
    if c.json.is_some() {
        cfg.output = c.json.clone();
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Run, print the summary, time to stderr, JSON to the output path.
fn run_and_emit(cfg: &RunConfig) -> Result<Report, Failure> {
    let start = Instant::now();
    let report = run_suite(cfg)?;
    emit(&report, cfg, start)?;
    Ok(report)
}

fn emit(report: &Report, cfg: &RunConfig, start: Instant) -> Result<(), Failure> {
    println!("{}", report.summary());
    for t in report.trials.iter().filter(|t| !t.pass).take(5) {
        let detail = t.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
        let err = t.error.map(|e| format!(" error {e:.3e}")).unwrap_or_default();
        println!("  failed: {}{err}{detail}", t.label);
    }
    eprintln!("{}: {:.2} s", report.suite, start.elapsed().as_secs_f64());
    if let Some(path) = &cfg.output {
        write(path, &report.to_json())?;
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Outcome {
    let suites: Vec<Suite> = match (&args.suite, args.all) {
        (Some(s), false) => vec![s.parse()?],
        (None, true) => Suite::ALL.to_vec(),
        (None, false) if args.config.is_some() => vec![],
        _ => return Err(Failure::Usage("give --suite NAME or --all".into())),
    };
    if args.all {
        let c = &args.common;
        if args.config.is_some() || c.n.is_some() || c.a.is_some() || c.k.is_some() || c.mode.is_some() || c.tol.is_some() {
            return Err(Failure::Usage("--all runs every suite at its defaults; only --trials, --seed and --json apply".into()));
        }
    }
    let file = args.config.as_deref().map(load).transpose()?;
    let mut reports = Vec::new();
    let targets: Vec<Option<Suite>> = if suites.is_empty() { vec![None] } else { suites.into_iter().map(Some).collect() };
    for suite in targets {
        let mut cfg = match (&file, suite) {
            (Some(f), fallback) => {
                let path = args.config.as_deref().expect("file implies path");
                let cfg = RunConfig::from_file(f, fallback).map_err(|e| with_path(path, e))?;
                if fallback.is_some_and(|s| f.contains("suite") && s != cfg.suite) {
                    return Err(Failure::Usage("--suite disagrees with the suite named in the config".into()));
                }
                cfg
            }
            (None, Some(s)) => RunConfig::new(s),
            (None, None) => unreachable!("a suite or a config is required"),
        };
        apply(&mut cfg, &args.common)?;
        if args.all {
            cfg.output = None;
        }
        reports.push(run_and_emit(&cfg)?);
    }
    if args.all {
        if let Some(path) = &args.common.json {
            let mut text = serde_json::to_string_pretty(&reports).expect("reports serialize");
            text.push('\n');
            write(path, &text)?;
        }
    }
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn density(args: DensityArgs) -> Outcome {
    let file = load(&args.config)?;
    let n: Option<usize> = file.get("n").map_err(|e| with_path(&args.config, e))?;
    let fallback = match args.common.n.or(n) {
        Some(n) if n % 2 == 1 => Suite::DensityOdd,
        _ => Suite::DensityEven,
    };
    let mut cfg = RunConfig::from_file(&file, Some(fallback)).map_err(|e| with_path(&args.config, e))?;
    if !matches!(cfg.suite, Suite::DensityEven | Suite::DensityOdd) {
        return Err(Failure::Usage(format!("density needs a density suite, config names {}", cfg.suite)));
    }
    apply(&mut cfg, &args.common)?;
    let report = run_and_emit(&cfg)?;
    for t in &report.trials {
        let v = |k: &str| t.values.get(k).copied().unwrap_or(f64::NAN);
        println!(
            "  {}: lhs = {} {:+}i, rhs = {} {:+}i, rel err = {:.3e}",
            t.label,
            v("lhs_re"),
            v("lhs_im"),
            v("rhs_re"),
            v("rhs_im"),
            t.error.unwrap_or(f64::NAN)
        );
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn mehler(args: MehlerArgs) -> Outcome {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(&load(path)?, Some(Suite::MehlerOracle)).map_err(|e| with_path(path, e))?,
        None => RunConfig::new(Suite::MehlerOracle),
    };
    if cfg.suite != Suite::MehlerOracle {
        return Err(Failure::Usage(format!("mehler needs the mehler-oracle suite, config names {}", cfg.suite)));
    }
    cfg.theta = args.theta.or(cfg.theta);
    cfg.time = args.time.or(cfg.time);
    cfg.spacings = args.spacings.clone().or(cfg.spacings);
    cfg.tol = args.tol.or(cfg.tol);
    if args.json.is_some() {
        cfg.output = args.json.clone();
    }
    let start = Instant::now();
    let (report, study) = run_mehler(&cfg)?;
    emit(&report, &cfg, start)?;
    print!("{}", study.to_csv());
    if let Some(path) = &args.csv {
        write(path, &study.to_csv())?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn report(args: ReportArgs) -> Outcome {
    let mut all_pass = true;
    for path in &args.files {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let reports = match serde_json::from_str::<Vec<Report>>(&text) {
            Ok(list) => list,
            Err(_) => vec![Report::from_json(&text).map_err(|e| with_path(path, e))?],
        };
        for r in reports {
            println!("{}  [{}]", r.summary(), path.display());
            all_pass &= r.passed;
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
