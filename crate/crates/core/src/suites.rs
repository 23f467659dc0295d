//! Verification suites and their JSON reports.
//!
//! Every suite expands its configuration into an ordered list of cases,
//! runs them on the rayon pool and collects one [`TrialRecord`] per case in
//! index order. Each case draws from its own seeded stream, so a report
//! depends only on the configuration and seed, never on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blade::{full_mask, rotation_lift, supertrace, supertrace_normalization, BladePair, CliffordElement};
use crate::config::{Angles, ConfigFile};
use crate::density::{
    berezin_lhs, berezin_rhs, density_pair, odd_density_pair, symbol_expansion_lift, BerezinInput, DensityPair,
    FixedPointData, OddFixedPointData,
};
use crate::error::{usage, Error, Result};
use crate::forms::{
    a_hat, det_sqrt_cosh, det_sqrt_sinhc, nu_phi, pfaffian_berezin, pfaffian_by, pfaffian_recursive,
    AntisymmetricMatrix, GroupElement, KernelPath,
};
use crate::linalg::Matrix;
use crate::matrix_rep::{oracle_supertrace, pullback_lift, rep, tau_matrix};
use crate::mehler::{closed_form_trace_factor, convergence_study_with, ConvergenceStudy, fd_heat_trace, OscillatorSpec, DEFAULT_SPACINGS, ORDER_BAND};
use crate::random::{self, trial_rng, ANGLE_MARGIN};
use crate::scalar::{sign_pow, Complex64, GaussQ, Nil, Scalar};

/// Report schema version.
pub const SCHEMA: u32 = 1;
/// Absolute error below which a comparison passes regardless of scale.
pub const ABS_FLOOR: f64 = 1e-12;
pub const DEFAULT_SEED: u64 = 7;
/// Worker cap read by [`configure_threads`].
pub const THREADS_ENV: &str = "SUBSIG_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Float,
    Nilpotent,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            "nilpotent" => Ok(Mode::Nilpotent),
            _ => usage(format!("unknown mode `{s}` (expected exact, float or nilpotent)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
            Mode::Nilpotent => "nilpotent",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    CliffordRelations,
    Supertrace,
    TauSquare,
    RotationLift,
    LiftExpansion,
    Berezin,
    CharForms,
    DensityEven,
    DensityOdd,
    MehlerOracle,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::CliffordRelations,
        Suite::Supertrace,
        Suite::TauSquare,
        Suite::RotationLift,
        Suite::LiftExpansion,
        Suite::Berezin,
        Suite::CharForms,
        Suite::DensityEven,
        Suite::DensityOdd,
        Suite::MehlerOracle,
    ];

    /// Name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            Suite::CliffordRelations => "clifford-relations",
            Suite::Supertrace => "lemma-3.11",
            Suite::TauSquare => "tau-square",
            Suite::RotationLift => "rotation-lift",
            Suite::LiftExpansion => "eq-3.31",
            Suite::Berezin => "lemma-3.19",
            Suite::CharForms => "char-forms",
            Suite::DensityEven => "density-even",
            Suite::DensityOdd => "density-odd",
            Suite::MehlerOracle => "mehler-oracle",
        }
    }

    /// Descriptive alternative name.
    pub fn alias(self) -> &'static str {
        match self {
            Suite::Supertrace => "supertrace",
            Suite::LiftExpansion => "lift-expansion",
            Suite::Berezin => "berezin",
            other => other.name(),
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Suite::CliffordRelations => "generator anticommutators in the algebra and on ΛV",
            Suite::Supertrace => "blade supertrace against the ΛV oracle",
            Suite::TauSquare => "τ^2 = (-1)^{k(k+1)/2}",
            Suite::RotationLift => "spin lift of a rotation against the ΛV pullback",
            Suite::LiftExpansion => "symbol expansion of the lift, every ĉ-degree",
            Suite::Berezin => "Berezin coefficient against the characteristic-form product",
            Suite::CharForms => "Chern-root and series paths of the characteristic forms",
            Suite::DensityEven => "supertrace and characteristic-form densities, even dimension",
            Suite::DensityOdd => "trace and characteristic-form densities, odd dimension",
            Suite::MehlerOracle => "finite-difference oscillator trace against the closed form",
        }
    }

    /// Accepted modes; the first is the default.
    pub fn modes(self) -> &'static [Mode] {
        match self {
            Suite::CliffordRelations | Suite::TauSquare => &[Mode::Exact],
            Suite::Supertrace => &[Mode::Exact, Mode::Float],
            Suite::CharForms => &[Mode::Float, Mode::Exact],
            Suite::DensityEven => &[Mode::Float, Mode::Nilpotent],
            _ => &[Mode::Float],
        }
    }

    pub fn default_tol(self, mode: Mode) -> f64 {
        match (self, mode) {
            (_, Mode::Exact) => 0.0,
            (Suite::Supertrace, _) => 1e-12,
            (Suite::RotationLift | Suite::LiftExpansion, _) => 1e-10,
            (Suite::Berezin | Suite::CharForms, _) => 1e-9,
            (Suite::DensityEven | Suite::DensityOdd, _) => 1e-8,
            (Suite::MehlerOracle, _) => 1e-3,
            _ => 0.0,
        }
    }

    /// Random trials per parameter combination.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::CliffordRelations => 10,
            Suite::Supertrace => 500,
            Suite::TauSquare | Suite::MehlerOracle => 1,
            Suite::RotationLift | Suite::Berezin => 100,
            Suite::LiftExpansion | Suite::CharForms | Suite::DensityEven | Suite::DensityOdd => 50,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s || x.alias() == s).map_or_else(
            || {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                usage(format!("unknown suite `{s}` (expected one of {})", names.join(", ")))
            },
            Ok,
        )
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub suite: Suite,
    pub n: Option<usize>,
    pub a: Option<usize>,
    pub k: Option<usize>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub mode: Option<Mode>,
    pub tol: Option<f64>,
    /// `None` or [`Angles::Random`] draw from the seed.
    pub angles: Option<Angles>,
    /// Curvature coefficients `c_{pq}`: one row per plane, one column per
    /// fixed-set generator.
    pub curvature: Option<Vec<Vec<f64>>>,
    pub theta: Option<f64>,
    pub time: Option<f64>,
    pub coupling: Option<Vec<Vec<f64>>>,
    pub spacings: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(suite: Suite) -> Self {
        RunConfig {
            suite,
            n: None,
            a: None,
            k: None,
            trials: None,
            seed: DEFAULT_SEED,
            mode: None,
            tol: None,
            angles: None,
            curvature: None,
            theta: None,
            time: None,
            coupling: None,
            spacings: None,
            output: None,
        }
    }

    /// Build from a config file; `fallback` supplies the suite when the file
    /// does not name one.
    pub fn from_file(file: &ConfigFile, fallback: Option<Suite>) -> Result<Self> {
        let suite = match file.raw("suite") {
            Some(s) => pinned(file, "suite", s.parse::<Suite>())?,
            None => fallback.ok_or_else(|| Error::Config { line: 0, msg: "missing `suite`".into() })?,
        };
        let mut cfg = RunConfig::new(suite);
        cfg.n = file.get("n")?;
        cfg.a = file.get("a")?;
        cfg.k = file.get("k")?;
        cfg.trials = file.get("trials")?;
        if let Some(seed) = file.get("seed")? {
            cfg.seed = seed;
        }
        cfg.mode = match file.raw("mode") {
            Some(m) => Some(pinned(file, "mode", m.parse())?),
            None => None,
        };
        cfg.tol = file.get("tol")?;
        cfg.angles = file.angles()?;
        if cfg.angles == Some(Angles::Random) && !file.contains("seed") {
            return Err(file.error("angles", "`angles = random` needs an explicit `seed`"));
        }
        cfg.curvature = file.matrix("curvature")?;
        cfg.theta = file.get("theta")?;
        cfg.time = file.get("time")?;
        cfg.coupling = file.matrix("coupling")?;
        cfg.spacings = file.list("spacings")?;
        cfg.output = file.raw("output").map(PathBuf::from);
        for key in crate::config::KEYS {
            if file.contains(key) {
                pinned(file, key, cfg.check_key(key))?;
            }
        }
        Ok(cfg)
    }

    /// Reject keys the suite does not read.
    fn check_key(&self, key: &str) -> Result<()> {
        let used: &[&str] = match self.suite {
            Suite::CliffordRelations | Suite::TauSquare => &["n", "k", "trials"],
            Suite::Supertrace => &["n", "trials"],
            Suite::RotationLift | Suite::LiftExpansion => &["n", "a", "trials", "angles"],
            Suite::Berezin => &["n", "k", "trials", "angles"],
            Suite::CharForms => &["n", "trials"],
            Suite::DensityEven => &["n", "a", "k", "trials", "angles", "curvature"],
            Suite::DensityOdd => &["n", "k", "trials", "angles"],
            Suite::MehlerOracle => &["theta", "time", "coupling", "spacings"],
        };
        let common = ["suite", "seed", "mode", "tol", "output"];
        if common.contains(&key) || used.contains(&key) {
            Ok(())
        } else {
            usage(format!("key `{key}` is not used by suite {}", self.suite))
        }
    }

    pub fn mode(&self) -> Result<Mode> {
        let modes = self.suite.modes();
        match self.mode {
            None => Ok(modes[0]),
            Some(m) if modes.contains(&m) => Ok(m),
            Some(m) => usage(format!("suite {} does not support mode {m}", self.suite)),
        }
    }

    pub fn tolerance(&self, mode: Mode) -> Result<f64> {
        match self.tol {
            None => Ok(self.suite.default_tol(mode)),
            Some(t) if t >= 0.0 && t.is_finite() => Ok(t),
            Some(t) => usage(format!("tolerance {t} must be a finite non-negative number")),
        }
    }

    pub fn trials(&self) -> Result<usize> {
        match self.trials {
            Some(0) => usage("trial count must be positive"),
            Some(t) => Ok(t),
            None => Ok(self.suite.default_trials()),
        }
    }

    fn given_angles(&self) -> Option<&[f64]> {
        match &self.angles {
            Some(Angles::Given(v)) => Some(v),
            _ => None,
        }
    }

    /// Explicit angles, or `count` random ones.
    fn draw_angles(&self, rng: &mut impl Rng, count: usize, margin: f64) -> Result<Vec<f64>> {
        match self.given_angles() {
            Some(v) if v.len() != count => usage(format!("expected {count} angles, got {}", v.len())),
            Some(v) => Ok(v.to_vec()),
            None => Ok(random::angles(rng, count, margin)),
        }
    }

    /// Reject explicit angles of the wrong count before any trial runs.
    fn check_angles(&self, count: usize) -> Result<()> {
        match self.given_angles() {
            Some(v) if v.len() != count => usage(format!("expected {count} angles, got {}", v.len())),
            _ => Ok(()),
        }
    }

    /// The explicit angles, or placeholders for validating the shape alone.
    fn probe_angles(&self, count: usize) -> Vec<f64> {
        self.given_angles().map_or_else(|| vec![1.0; count], <[f64]>::to_vec)
    }

    /// A single trial when angles are explicit.
    fn trial_count(&self) -> Result<usize> {
        if self.given_angles().is_some() {
            Ok(1)
        } else {
            self.trials()
        }
    }
}

fn pinned<T>(file: &ConfigFile, key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| pin(file, key, e))
}

fn pin(file: &ConfigFile, key: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        Error::Usage(msg) => file.error(key, msg),
        other => file.error(key, other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub label: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl TrialRecord {
    fn new(label: impl Into<String>, pass: bool) -> Self {
        TrialRecord { index: 0, label: label.into(), pass, error: None, values: BTreeMap::new(), detail: None }
    }

    fn exact(label: impl Into<String>, mismatches: usize, checked: usize) -> Self {
        TrialRecord::new(label, mismatches == 0).value("checked", checked as f64).value("mismatches", mismatches as f64)
    }

    fn measured(label: impl Into<String>, error: f64, tol: f64) -> Self {
        let mut r = TrialRecord::new(label, error <= tol);
        r.error = Some(error);
        r
    }

    fn failed(label: impl Into<String>, e: &Error) -> Self {
        let mut r = TrialRecord::new(label, false);
        r.detail = Some(e.to_string());
        r
    }

    fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    fn complex(self, key: &str, z: Complex64) -> Self {
        self.value(&format!("{key}_re"), z.re).value(&format!("{key}_im"), z.im)
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub mode: Mode,
    pub seed: u64,
    pub tolerance: f64,
    pub trials: Vec<TrialRecord>,
    pub max_error: Option<f64>,
    pub failures: usize,
    pub passed: bool,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Report {
    fn assemble(cfg: &RunConfig, mode: Mode, tolerance: f64, mut trials: Vec<TrialRecord>, notes: Vec<String>) -> Self {
        for (i, t) in trials.iter_mut().enumerate() {
            t.index = i;
        }
        let max_error = trials.iter().filter_map(|t| t.error).fold(None, |acc: Option<f64>, e| {
            Some(match acc {
                Some(m) if !(e > m) && !e.is_nan() => m,
                _ => e,
            })
        });
        let failures = trials.iter().filter(|t| !t.pass).count();
        Report {
            schema: SCHEMA,
            suite: cfg.suite.name().to_string(),
            mode,
            seed: cfg.seed,
            tolerance,
            passed: failures == 0 && !trials.is_empty(),
            trials,
            max_error,
            failures,
            notes,
        }
    }

    /// Pretty JSON with a trailing newline; identical input gives identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Usage(format!("not a report: {e}")))
    }

    /// One line: suite, verdict, trial counts, worst error.
    pub fn summary(&self) -> String {
        let worst = self.max_error.map_or_else(|| "exact".to_string(), |e| format!("max error {e:.3e}"));
        format!(
            "{:<20} {}  {}/{} trials passed, {}",
            self.suite,
            if self.passed { "PASS" } else { "FAIL" },
            self.trials.len() - self.failures,
            self.trials.len(),
            worst
        )
    }
}

/// Cap the worker pool from `SUBSIG_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Usage(format!("{THREADS_ENV} = `{v}` must be a positive integer"))
    })?;
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

// ---------------------------------------------------------------------------
// Runner

/// A unit of work: label and a closure producing its record.
struct Case<'a> {
    label: String,
    run: Box<dyn Fn() -> Result<TrialRecord> + Send + Sync + 'a>,
}

impl<'a> Case<'a> {
    fn new(label: impl Into<String>, run: impl Fn() -> Result<TrialRecord> + Send + Sync + 'a) -> Self {
        Case { label: label.into(), run: Box::new(run) }
    }
}

fn execute(cases: Vec<Case<'_>>) -> Vec<TrialRecord> {
    cases
        .par_iter()
        .map(|c| match (c.run)() {
            Ok(mut r) => {
                r.label = c.label.clone();
                r
            }
            Err(e) => TrialRecord::failed(c.label.clone(), &e),
        })
        .collect()
}

/// Stream id of a trial, built from its parameters so that narrowing the
/// parameter range reproduces the same draws.
fn stream(tag: u64, n: usize, a: usize, k: usize, trial: usize) -> u64 {
    (tag << 56) | ((n as u64) << 48) | ((a as u64) << 40) | ((k as u64) << 32) | trial as u64
}

/// `|l - r| / max(|l|, |r|, ABS_FLOOR / tol)`: relative error, with the
/// scale floored so that values vanishing on both sides pass at `ABS_FLOOR`.
pub fn floored_rel_err(l: Complex64, r: Complex64, tol: f64) -> f64 {
    let floor = if tol > 0.0 { ABS_FLOOR / tol } else { f64::MIN_POSITIVE };
    (l - r).norm() / l.norm().max(r.norm()).max(floor)
}

/// Run a suite. Usage errors are returned before any trial runs; failures
/// inside a trial are recorded in the report.
pub fn run_suite(cfg: &RunConfig) -> Result<Report> {
    let mode = cfg.mode()?;
    let tol = cfg.tolerance(mode)?;
    let mut notes = Vec::new();
    let trials = match cfg.suite {
        Suite::CliffordRelations => clifford_relations(cfg)?,
        Suite::Supertrace => supertrace_suite(cfg, mode, tol)?,
        Suite::TauSquare => tau_square(cfg)?,
        Suite::RotationLift => rotation_lift_suite(cfg, tol)?,
        Suite::LiftExpansion => lift_expansion(cfg, tol)?,
        Suite::Berezin => berezin_suite(cfg, tol, &mut notes)?,
        Suite::CharForms => char_forms(cfg, mode, tol)?,
        Suite::DensityEven => density_even(cfg, mode, tol, &mut notes)?,
        Suite::DensityOdd => density_odd(cfg, tol, &mut notes)?,
        Suite::MehlerOracle => return run_mehler(cfg).map(|(r, _)| r),
    };
    Ok(Report::assemble(cfg, mode, tol, trials, notes))
}

fn dims(given: Option<usize>, default: impl IntoIterator<Item = usize>, ok: impl Fn(usize) -> bool, what: &str) -> Result<Vec<usize>> {
    match given {
        Some(n) if ok(n) => Ok(vec![n]),
        Some(n) => usage(format!("{what} does not accept n = {n}")),
        None => Ok(default.into_iter().collect()),
    }
}

fn matrix_is_zero<S: Scalar>(m: &Matrix<S>) -> bool {
    m.entries().iter().all(Scalar::is_zero)
}

// ---------------------------------------------------------------------------
// Algebra suites

fn generators(n: usize) -> Result<Vec<(CliffordElement<GaussQ>, bool)>> {
    let mut out = Vec::new();
    for i in 1..=n {
        out.push((CliffordElement::c(n, i)?, false));
    }
    for i in 1..=n {
        out.push((CliffordElement::chat(n, i)?, true));
    }
    Ok(out)
}

fn relations_case(n: usize) -> Result<TrialRecord> {
    let gens = generators(n)?;
    let reps: Vec<Matrix<GaussQ>> = gens.iter().map(|(g, _)| rep(g)).collect::<Result<_>>()?;
    let id = Matrix::<GaussQ>::identity(1 << n);
    let (mut checked, mut bad) = (0, 0);
    for i in 0..gens.len() {
        for j in i..gens.len() {
            let (x, hx) = &gens[i];
            let (y, _) = &gens[j];
            let expected = match (i == j, hx) {
                (false, _) => 0,
                (true, false) => -2,
                (true, true) => 2,
            };
            let target = GaussQ::from_i64(expected);
            let anti = x.checked_mul(y)?.checked_add(&y.checked_mul(x)?)?;
            let alg_ok = anti.checked_sub(&CliffordElement::scalar(n, target.clone()))?.is_zero();
            let (rx, ry) = (&reps[i], &reps[j]);
            let rxy = rx.mul(ry)?;
            let rep_anti = rxy.add(&ry.mul(rx)?)?;
            let rep_ok = matrix_is_zero(&rep_anti.sub(&id.scale(&target))?);
            let hom_ok = matrix_is_zero(&rep(&x.checked_mul(y)?)?.sub(&rxy)?);
            checked += 3;
            bad += [alg_ok, rep_ok, hom_ok].iter().filter(|ok| !**ok).count();
        }
    }
    Ok(TrialRecord::exact("", bad, checked))
}

fn homomorphism_case(n: usize, seed: u64, trial: usize) -> Result<TrialRecord> {
    let mut rng = trial_rng(seed, stream(1, n, 0, 0, trial));
    let x = random::exact_element(&mut rng, n, 4);
    let y = random::exact_element(&mut rng, n, 4);
    let ok = matrix_is_zero(&rep(&x.checked_mul(&y)?)?.sub(&rep(&x)?.mul(&rep(&y)?)?)?);
    Ok(TrialRecord::exact("", usize::from(!ok), 1))
}

fn clifford_relations(cfg: &RunConfig) -> Result<Vec<TrialRecord>> {
    let ns = dims(cfg.n, 1..=6, |n| (1..=8).contains(&n), "clifford-relations")?;
    let trials = cfg.trials()?;
    let seed = cfg.seed;
    let mut cases = Vec::new();
    for &n in &ns {
        cases.push(Case::new(format!("n={n} relations"), move || relations_case(n)));
        for t in 0..trials {
            cases.push(Case::new(format!("n={n} product #{t}"), move || homomorphism_case(n, seed, t)));
        }
    }
    Ok(execute(cases))
}

fn words_case(n: usize) -> Result<TrialRecord> {
    let full = full_mask(n);
    let norm = GaussQ::from_i64(supertrace_normalization(n));
    let (mut checked, mut bad) = (0, 0);
    for c in 0..=full {
        for h in 0..=full {
            let x = CliffordElement::blade(n, BladePair::new(c, h), GaussQ::one())?;
            let expected = if c == full && h == full { norm.clone() } else { GaussQ::zero() };
            checked += 1;
            if supertrace(&x) != expected || oracle_supertrace(&x)? != expected {
                bad += 1;
            }
        }
    }
    Ok(TrialRecord::exact("", bad, checked).value("full_word", supertrace_normalization(n) as f64))
}

fn supertrace_case(n: usize, mode: Mode, tol: f64, seed: u64, trial: usize) -> Result<TrialRecord> {
    let mut rng = trial_rng(seed, stream(2, n, 0, 0, trial));
    Ok(match mode {
        Mode::Exact => {
            let x = random::exact_element(&mut rng, n, 6);
            TrialRecord::exact("", usize::from(supertrace(&x) != oracle_supertrace(&x)?), 1)
        }
        _ => {
            let x = random::float_element(&mut rng, n, 6);
            TrialRecord::measured("", (supertrace(&x) - oracle_supertrace(&x)?).norm(), tol)
        }
    })
}

fn supertrace_suite(cfg: &RunConfig, mode: Mode, tol: f64) -> Result<Vec<TrialRecord>> {
    let ns = dims(cfg.n, 1..=5, |n| (1..=8).contains(&n), "lemma-3.11")?;
    let trials = cfg.trials()?;
    let seed = cfg.seed;
    let mut cases = Vec::new();
    for &n in &ns {
        cases.push(Case::new(format!("n={n} blade words"), move || words_case(n)));
        for t in 0..trials {
            cases.push(Case::new(format!("n={n} element #{t}"), move || supertrace_case(n, mode, tol, seed, t)));
        }
    }
    Ok(execute(cases))
}

fn tau_square(cfg: &RunConfig) -> Result<Vec<TrialRecord>> {
    let ns = dims(cfg.n, 0..=6, |n| n <= 8, "tau-square")?;
    let mut cases = Vec::new();
    for &n in &ns {
        for k in 0..=n {
            if cfg.k.is_some_and(|g| g != k) {
                continue;
            }
            cases.push(Case::new(format!("n={n} k={k}"), move || {
                let t = tau_matrix::<GaussQ>(n, k)?;
                let sign = GaussQ::from_i64(sign_pow((k * (k + 1) / 2) as i64));
                let diff = t.mul(&t)?.sub(&Matrix::identity(1 << n).scale(&sign))?;
                Ok(TrialRecord::exact("", usize::from(!matrix_is_zero(&diff)), 1))
            }));
        }
    }
    if cases.is_empty() {
        return usage("no (n, k) pair with k <= n selected");
    }
    Ok(execute(cases))
}

fn even_planes(cfg: &RunConfig, what: &str) -> Result<(Vec<usize>, usize)> {
    let ns = dims(cfg.n, [2, 4], |n| n % 2 == 0 && (2..=8).contains(&n), what)?;
    let a = cfg.a.unwrap_or(0);
    if a % 2 == 1 || ns.iter().any(|&n| a > n) {
        return usage(format!("{what} needs an even fixed dimension a <= n, got a = {a}"));
    }
    Ok((ns, a))
}

fn rotation_lift_suite(cfg: &RunConfig, tol: f64) -> Result<Vec<TrialRecord>> {
    let (ns, a) = even_planes(cfg, "rotation-lift")?;
    let trials = cfg.trial_count()?;
    let mut cases = Vec::new();
    for &n in &ns {
        cfg.check_angles((n - a) / 2)?;
        for t in 0..trials {
            cases.push(Case::new(format!("n={n} a={a} #{t}"), move || {
                let mut rng = trial_rng(cfg.seed, stream(4, n, a, 0, t));
                let angles = cfg.draw_angles(&mut rng, (n - a) / 2, 0.0)?;
                let lift = rep(&rotation_lift::<Complex64>(&angles, n, a)?)?;
                let pull = pullback_lift::<Complex64>(&angles, n, a)?;
                Ok(TrialRecord::measured("", lift.max_diff(&pull)?, tol))
            }));
        }
    }
    Ok(execute(cases))
}

fn lift_expansion(cfg: &RunConfig, tol: f64) -> Result<Vec<TrialRecord>> {
    let (ns, a) = even_planes(cfg, "eq-3.31")?;
    let trials = cfg.trial_count()?;
    let mut cases = Vec::new();
    for &n in &ns {
        cfg.check_angles((n - a) / 2)?;
        for t in 0..trials {
            cases.push(Case::new(format!("n={n} a={a} #{t}"), move || {
                let mut rng = trial_rng(cfg.seed, stream(5, n, a, 0, t));
                let angles = cfg.draw_angles(&mut rng, (n - a) / 2, ANGLE_MARGIN)?;
                let d = FixedPointData::<Complex64>::flat(n, a, 0, &angles);
                let mut worst: f64 = 0.0;
                let mut rec = TrialRecord::new("", true);
                for l2 in (0..=n - a + 2).step_by(2) {
                    let (l, r) = symbol_expansion_lift(&d, l2)?;
                    let e = l.checked_sub(&r)?.norm();
                    rec = rec.value(&format!("error_l2_{l2}"), e);
                    worst = worst.max(e);
                }
                let mut out = TrialRecord::measured("", worst, tol);
                out.values = rec.values;
                Ok(out)
            }));
        }
    }
    Ok(execute(cases))
}

// ---------------------------------------------------------------------------
// Forms and densities

fn berezin_suite(cfg: &RunConfig, tol: f64, notes: &mut Vec<String>) -> Result<Vec<TrialRecord>> {
    let pairs: Vec<(usize, usize)> = match (cfg.n, cfg.k) {
        (None, None) => vec![(4, 2), (6, 2), (6, 4)],
        (Some(n), Some(k)) => vec![(n, k)],
        _ => return usage("lemma-3.19 needs both n and k, or neither"),
    };
    for &(n, k) in &pairs {
        if n % 2 == 1 || k % 2 == 1 || k > n || n > 8 {
            return usage(format!("lemma-3.19 needs even k <= n <= 8, got n = {n}, k = {k}"));
        }
    }
    notes.push(format!("relative errors use a scale floor of {ABS_FLOOR:e}/tol"));
    let trials = cfg.trial_count()?;
    let mut cases = Vec::new();
    for &(n, k) in &pairs {
        cfg.check_angles(n / 2)?;
        for t in 0..trials {
            cases.push(Case::new(format!("n={n} k={k} #{t}"), move || {
                let mut rng = trial_rng(cfg.seed, stream(6, n, 0, k, t));
                let all = cfg.draw_angles(&mut rng, n / 2, 0.0)?;
                let block = BerezinInput::<Complex64>::from_angles(n, k, &all[..k / 2], &all[k / 2..])?;
                let (l, r) = (berezin_lhs(&block)?, berezin_rhs(&block)?);
                let qe = random::special_orthogonal(&mut rng, k);
                let qp = random::special_orthogonal(&mut rng, n - k);
                let rotated = BerezinInput {
                    n,
                    k,
                    e_block: block.e_block.conjugate(&qe)?,
                    perp_block: block.perp_block.conjugate(&qp)?,
                };
                let (lc, rc) = (berezin_lhs(&rotated)?, berezin_rhs(&rotated)?);
                let errs = [floored_rel_err(l, r, tol), floored_rel_err(lc, rc, tol), floored_rel_err(lc, l, tol)];
                let worst = errs.iter().cloned().fold(0.0, f64::max);
                Ok(TrialRecord::measured("", worst, tol)
                    .complex("lhs", l)
                    .complex("rhs", r)
                    .value("error_block", errs[0])
                    .value("error_conjugated", errs[1])
                    .value("error_invariance", errs[2]))
            }));
        }
    }
    Ok(execute(cases))
}

fn path_error(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn char_forms_float(side: usize, seed: u64, trial: usize, tol: f64) -> Result<TrialRecord> {
    let mut rng = trial_rng(seed, stream(7, side, 0, 0, trial));
    let radius = rng.gen_range(0.05..2.0);
    let m = random::antisymmetric(&mut rng, side, radius);
    let (c, s) = (KernelPath::ChernRoots, KernelPath::Series);
    let mut errs = vec![
        ("cosh", path_error(det_sqrt_cosh(&m, c)?, det_sqrt_cosh(&m, s)?)),
        ("sinhc", path_error(det_sqrt_sinhc(&m, c)?, det_sqrt_sinhc(&m, s)?)),
        ("a_hat", path_error(a_hat(&m, c)?, a_hat(&m, s)?)),
    ];
    if side.is_multiple_of(2) {
        errs.push(("pfaffian", path_error(pfaffian_by(&m, c)?, pfaffian_by(&m, s)?)));
    }
    let margin = 0.5;
    let g = GroupElement { angles: random::angles(&mut rng, side / 2, margin), reflected: side % 2 == 1 };
    let roots: Vec<Complex64> = (0..side / 2).map(|_| Complex64::new(rng.gen_range(-radius..radius), 0.0)).collect();
    let block = AntisymmetricMatrix::from_roots(&roots, side % 2 == 1);
    errs.push(("nu", path_error(nu_phi(&g, &block, c)?, nu_phi(&g, &block, s)?)));
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let mut rec = TrialRecord::measured("", worst, tol).value("radius", radius);
    for (name, e) in errs {
        rec = rec.value(&format!("error_{name}"), e);
    }
    Ok(rec)
}

fn char_forms_exact(side: usize, seed: u64, trial: usize) -> Result<TrialRecord> {
    let mut rng = trial_rng(seed, stream(8, side, 0, 0, trial));
    let m = random::antisymmetric_exact(&mut rng, side);
    if side % 2 == 1 {
        // no Pfaffian; the determinant of an odd antisymmetric matrix vanishes
        return Ok(TrialRecord::exact("", usize::from(!m.to_matrix().det().is_zero()), 1));
    }
    let pf = pfaffian_berezin(&m)?;
    let squared = pf.clone() * pf.clone() == m.to_matrix().det();
    let recursive = pf == pfaffian_recursive(&m)?;
    Ok(TrialRecord::exact("", usize::from(!squared) + usize::from(!recursive), 2))
}

fn char_forms(cfg: &RunConfig, mode: Mode, tol: f64) -> Result<Vec<TrialRecord>> {
    let sides = dims(cfg.n, 2..=6, |n| (1..=8).contains(&n), "char-forms")?;
    let trials = cfg.trials()?;
    let seed = cfg.seed;
    let mut cases = Vec::new();
    for &side in &sides {
        for t in 0..trials {
            if mode == Mode::Float {
                cases.push(Case::new(format!("side={side} paths #{t}"), move || char_forms_float(side, seed, t, tol)));
            }
            let what = if side % 2 == 0 { "exact pfaffian" } else { "exact odd determinant" };
            cases.push(Case::new(format!("side={side} {what} #{t}"), move || char_forms_exact(side, seed, t)));
        }
    }
    Ok(execute(cases))
}

fn pair_record(p: DensityPair, tol: f64) -> TrialRecord {
    let e = floored_rel_err(p.lhs, p.rhs, tol);
    TrialRecord::measured("", e, tol).complex("lhs", p.lhs).complex("rhs", p.rhs).value("abs_err", p.abs_err())
}

fn nil_from_rows(rows: &[Vec<f64>], n: usize, a: usize) -> Result<Vec<Nil>> {
    if rows.len() != n / 2 || rows.iter().any(|r| r.len() != a / 2) {
        return usage(format!("curvature needs {} rows of {} coefficients", n / 2, a / 2));
    }
    Ok(rows
        .iter()
        .map(|r| {
            r.iter().enumerate().fold(Nil::zero(), |acc, (q, &c)| {
                acc + Nil::generator(q, a / 2) * Nil::constant(Complex64::new(c, 0.0))
            })
        })
        .collect())
}

fn density_even(cfg: &RunConfig, mode: Mode, tol: f64, notes: &mut Vec<String>) -> Result<Vec<TrialRecord>> {
    let ns = dims(cfg.n, [2, 4, 6], |n| n % 2 == 0 && (2..=crate::density::MAX_N).contains(&n), "density-even")?;
    if mode == Mode::Float && cfg.a.is_some_and(|a| a > 0) {
        return usage("a fixed set of positive dimension needs --mode nilpotent");
    }
    if cfg.curvature.is_some() && mode != Mode::Nilpotent {
        return usage("curvature is only read in nilpotent mode");
    }
    let mut combos = Vec::new();
    for &n in &ns {
        let a_values: Vec<usize> = match (mode, cfg.a) {
            (_, Some(a)) => vec![a],
            (Mode::Nilpotent, None) => (2..=n).step_by(2).collect(),
            _ => vec![0],
        };
        for a in a_values {
            let k_values: Vec<usize> = match cfg.k {
                Some(k) => vec![k],
                None => (0..=n - 2).step_by(2).collect(),
            };
            for k in k_values {
                cfg.check_angles(n.saturating_sub(a) / 2)?;
                let probe = FixedPointData::<Nil>::flat(n, a, k, &cfg.probe_angles(n.saturating_sub(a) / 2));
                probe.validate()?;
                if let Some(rows) = &cfg.curvature {
                    nil_from_rows(rows, n, a)?;
                }
                combos.push((n, a, k));
            }
        }
    }
    notes.push(format!("relative errors use a scale floor of {ABS_FLOOR:e}/tol"));
    if mode == Mode::Nilpotent {
        notes.push("curvature is block diagonal in the nilpotent fixed-set 2-forms".into());
    }
    let trials = cfg.trial_count()?;
    let mut cases = Vec::new();
    for &(n, a, k) in &combos {
        for t in 0..trials {
            cases.push(Case::new(format!("n={n} a={a} k={k} #{t}"), move || {
                let mut rng = trial_rng(cfg.seed, stream(9, n, a, k, t));
                let angles = cfg.draw_angles(&mut rng, (n - a) / 2, ANGLE_MARGIN)?;
                let pair = if mode == Mode::Nilpotent {
                    let curvature = match &cfg.curvature {
                        Some(rows) => nil_from_rows(rows, n, a)?,
                        None => random::nil_curvature(&mut rng, n, a),
                    };
                    density_pair(&FixedPointData { n, a, k, phi_angles: angles, curvature })?
                } else {
                    density_pair(&FixedPointData::<Complex64>::flat(n, a, k, &angles))?
                };
                Ok(pair_record(pair, tol))
            }));
        }
    }
    Ok(execute(cases))
}

fn density_odd(cfg: &RunConfig, tol: f64, notes: &mut Vec<String>) -> Result<Vec<TrialRecord>> {
    let ns = dims(cfg.n, [3, 5], |n| n % 2 == 1 && n <= crate::density::MAX_N, "density-odd")?;
    let mut combos = Vec::new();
    for &n in &ns {
        let ks: Vec<usize> = match cfg.k {
            Some(k) => vec![k],
            None => [0, 2].into_iter().filter(|&k| k < n).collect(),
        };
        for k in ks {
            cfg.check_angles((n - 1) / 2)?;
            OddFixedPointData { n, k, phi_angles: cfg.probe_angles((n - 1) / 2) }.validate()?;
            combos.push((n, k));
        }
    }
    notes.push(format!("relative errors use a scale floor of {ABS_FLOOR:e}/tol"));
    let trials = cfg.trial_count()?;
    let mut cases = Vec::new();
    for &(n, k) in &combos {
        for t in 0..trials {
            cases.push(Case::new(format!("n={n} k={k} #{t}"), move || {
                let mut rng = trial_rng(cfg.seed, stream(10, n, 0, k, t));
                let phi_angles = cfg.draw_angles(&mut rng, (n - 1) / 2, ANGLE_MARGIN)?;
                Ok(pair_record(odd_density_pair(&OddFixedPointData { n, k, phi_angles })?, tol))
            }));
        }
    }
    Ok(execute(cases))
}

// ---------------------------------------------------------------------------
// Mehler

/// Time at which the small-`t` coefficient is read off.
const SMALL_TIME: f64 = 1e-3;

/// The oscillator suite, also returning the refinement table.
pub fn run_mehler(cfg: &RunConfig) -> Result<(Report, ConvergenceStudy)> {
    if cfg.suite != Suite::MehlerOracle {
        return usage(format!("suite {} is not the oscillator oracle", cfg.suite));
    }
    let mode = cfg.mode()?;
    let tol = cfg.tolerance(mode)?;
    let mut notes = Vec::new();
    let (trials, study) = mehler_oracle(cfg, tol, &mut notes)?;
    Ok((Report::assemble(cfg, mode, tol, trials, notes), study))
}

fn mehler_oracle(cfg: &RunConfig, tol: f64, notes: &mut Vec<String>) -> Result<(Vec<TrialRecord>, ConvergenceStudy)> {
    let t = cfg.time.unwrap_or(0.5);
    let (m, b) = match (&cfg.coupling, cfg.theta) {
        (Some(_), Some(_)) => return usage("give either theta or coupling, not both"),
        (Some(rows), None) => {
            if rows.iter().any(|r| r.len() != rows.len()) {
                return usage("coupling must be square");
            }
            (rows.len(), rows.concat())
        }
        (None, theta) => {
            let th = theta.unwrap_or(0.5);
            (2, vec![0.0, -th, th, 0.0])
        }
    };
    let spacings = cfg.spacings.clone().unwrap_or_else(|| DEFAULT_SPACINGS.to_vec());
    if spacings.len() < 2 {
        return usage("a convergence order needs at least two grid spacings");
    }
    let coupling = OscillatorSpec::new(m, b.clone(), spacings[0], t)?.coupling()?;
    let study = convergence_study_with(m, b.clone(), t, &spacings)?;
    for r in &study.rows {
        notes.push(format!("h = {}: fd = {}, closed = {}, error = {:e}", r.spacing, r.fd, r.closed, r.error));
    }
    let mut trials = Vec::new();
    let finest = study.rows.last().expect("two or more rows");
    trials.push(
        TrialRecord::measured("finest-grid error", finest.error, tol)
            .value("spacing", finest.spacing)
            .value("fd", finest.fd)
            .value("closed", finest.closed),
    );
    let order = *study.orders.last().expect("two or more rows");
    let mut rec = TrialRecord::new("convergence order", ORDER_BAND.0 <= order && order <= ORDER_BAND.1)
        .value("order", order)
        .value("band_low", ORDER_BAND.0)
        .value("band_high", ORDER_BAND.1);
    for (i, o) in study.orders.iter().enumerate() {
        rec = rec.value(&format!("order_{i}"), *o);
    }
    trials.push(rec);
    let free_spec = OscillatorSpec::new(m, vec![0.0; m * m], spacings[0], t)?;
    let free = fd_heat_trace(&free_spec, t)?;
    trials.push(TrialRecord::measured("uncoupled ratio", (free - 1.0).abs(), ABS_FLOOR).value("ratio", free));
    // det^{1/2}((tB/2)/sinh(tB/2)) = 1 - tr(B^2) t^2 / 48 + O(t^4)
    let tr_b2: f64 = (0..m).map(|i| (0..m).map(|j| b[i * m + j] * b[j * m + i]).sum::<f64>()).sum();
    let expected = -tr_b2 / 48.0;
    let measured = (closed_form_trace_factor(&coupling, SMALL_TIME)? - 1.0) / (SMALL_TIME * SMALL_TIME);
    let coeff_err = (measured - expected).abs() / expected.abs().max(1.0);
    trials.push(
        TrialRecord::measured("small-time coefficient", coeff_err, 1e-6)
            .value("expected", expected)
            .value("measured", measured)
            .detail("increasing: (tθ/2)/sin(tθ/2) = 1 + (tθ)^2/24 + O(t^4)"),
    );
    Ok((trials, study))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(s.alias().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::Usage(_))));
    }

    #[test]
    fn unsupported_mode_is_a_usage_error() {
        let mut cfg = RunConfig::new(Suite::TauSquare);
        cfg.mode = Some(Mode::Float);
        assert!(matches!(run_suite(&cfg), Err(Error::Usage(_))));
    }

    #[test]
    fn small_tau_run() {
        let mut cfg = RunConfig::new(Suite::TauSquare);
        cfg.n = Some(3);
        let r = run_suite(&cfg).unwrap();
        assert!(r.passed);
        assert_eq!(r.trials.len(), 4);
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn config_keys_are_checked_per_suite() {
        let file = ConfigFile::parse("suite = tau-square\nn = 3\nangles = 1, 2\n").unwrap();
        assert!(matches!(RunConfig::from_file(&file, None), Err(Error::Config { line: 3, .. })));
        let file = ConfigFile::parse("suite = tau-squared\n").unwrap();
        assert!(matches!(RunConfig::from_file(&file, None), Err(Error::Config { line: 1, .. })));
        let file = ConfigFile::parse("suite = density-even\nangles = random\n").unwrap();
        assert!(matches!(RunConfig::from_file(&file, None), Err(Error::Config { line: 2, .. })));
    }

    #[test]
    fn floored_error() {
        let z = Complex64::new(0.0, 0.0);
        let tiny = Complex64::new(1e-17, 0.0);
        assert!(floored_rel_err(tiny, z, 1e-8) <= 1e-8);
        let one = Complex64::new(1.0, 0.0);
        assert!((floored_rel_err(one, one * 1.1, 1e-8) - 0.1 / 1.1).abs() < 1e-12);
    }
}
