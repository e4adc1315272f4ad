mod args;
mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use sha2::{Digest, Sha256};

use args::{CheckArgs, Cli, Command, Common, ConvergeArgs, CurveArgs, EstimatorKind, ModelKind, PointArgs, TimeArgs};
use preint::harness::{
    self, convergence_study, format_float, invariant_suite, timing_study, write_timing_csv, CheckSettings, Method,
    MRule, ReferenceConfig, Sampling, StudyConfig, StudyTarget,
};
use preint::model::pca_factorize;
use preint::{AnyModel, CovarianceSpec, Error, Executor, GeneratingVector, Kind, LinearGaussian, LognormalSum, RootConfig};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const PILOT_N: usize = 1 << 14;
const KOROBOV_N: u64 = 1 << 20;

enum Failure {
    Config(String),
    Numerical(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::RootFailure { .. } => Failure::Numerical(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("cannot write output: {e}"))
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let seed_env = std::env::var_os("PREINT_SEED").is_some();
    let argv = match config::merge(std::env::args_os().collect(), seed_env) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cli = Cli::parse_from(argv);
    let result = match &cli.command {
        Command::Point(a) => point(a),
        Command::Curve(a) => curve(a),
        Command::Converge(a) => converge(a),
        Command::Time(a) => time(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Checks) => ExitCode::from(EXIT_CHECK_FAILED),
    }
}

struct Setup {
    model: AnyModel,
    covariance: Option<CovarianceSpec>,
    lattice: GeneratingVector,
    root: RootConfig,
    exec: Executor,
}

fn setup(c: &Common) -> CliResult<Setup> {
    let (model, covariance) = match c.model {
        ModelKind::Linear => (AnyModel::Linear(LinearGaussian::new(c.coeffs.clone(), c.offset)?), None),
        ModelKind::Lognormal => {
            let cov: CovarianceSpec = c.cov.parse()?;
            let m = LognormalSum::new(pca_factorize(&cov)?)?;
            (AnyModel::Lognormal(m), Some(cov))
        }
    };
    let dim = match &model {
        AnyModel::Linear(m) => m.coeffs().len(),
        AnyModel::Lognormal(m) => m.factor().matrix().rows(),
    };
    let lattice = match c.korobov {
        Some(a) => GeneratingVector::korobov(a, KOROBOV_N, dim)?,
        None => match c.lattice.strip_prefix("builtin:") {
            Some(name) => GeneratingVector::builtin(name)?,
            None => GeneratingVector::load(&c.lattice)?,
        },
    };
    let root = RootConfig {
        tol: c.tol,
        ..RootConfig::default()
    };
    root.validate()?;
    let exec = Executor::with_workers(c.workers)?;
    Ok(Setup {
        model,
        covariance,
        lattice,
        root,
        exec,
    })
}

fn check_n(n: usize) -> CliResult<()> {
    if n.is_power_of_two() {
        Ok(())
    } else {
        Err(Failure::Config(format!("N = {n} is not a power of two")))
    }
}

fn check_r(r: usize) -> CliResult<()> {
    if r >= 1 {
        Ok(())
    } else {
        Err(Failure::Config("R must be at least 1".into()))
    }
}

fn kind(k: EstimatorKind) -> Kind {
    match k {
        EstimatorKind::Cdf => Kind::Cdf,
        EstimatorKind::Pdf => Kind::Pdf,
    }
}

/// SHA-256 of the settings that determine the output; worker count and
/// output path are left out.
fn header(command: &str, settings: &dyn std::fmt::Debug, common: &Common, lattice: &GeneratingVector) -> String {
    let mut stripped = common.clone();
    stripped.workers = 0;
    stripped.output = None;
    let digest = Sha256::digest(format!("{command} {settings:?} {stripped:?}").as_bytes());
    let hex = digest.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });
    format!(
        "preint {command} config_hash={hex} seed={} lattice={}",
        common.seed,
        lattice.source()
    )
}

fn emit(common: &Common, text: &str) -> CliResult<()> {
    match &common.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn point(a: &PointArgs) -> CliResult<()> {
    check_n(a.n)?;
    check_r(a.r)?;
    let s = setup(&a.common)?;
    let mut sampling = Sampling::new(&s.lattice, a.n, a.r, a.common.seed, &s.exec);
    sampling.root = s.root;
    let e = harness::estimate_point(&s.model, kind(a.kind), a.t, &sampling)?;

    let mut out = format!("# {}\n", header("point", &(a.kind, a.t, a.n, a.r), &a.common, &s.lattice));
    out.push_str("kind,t,N,R,estimate,stderr,rel_rmse,wall_time_s\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        kind(a.kind),
        format_float(a.t),
        a.n,
        a.r,
        format_float(e.mean),
        format_float(e.stderr),
        format_float(e.rel_rmse),
        format_float(e.wall_time)
    );
    emit(&a.common, &out)
}

fn curve(a: &CurveArgs) -> CliResult<()> {
    check_n(a.n)?;
    check_r(a.r)?;
    let s = setup(&a.common)?;
    let m = a.m.unwrap_or_else(|| MRule::Coupled.degree(a.n));
    let mut sampling = Sampling::new(&s.lattice, a.n, a.r, a.common.seed, &s.exec);
    sampling.root = s.root;
    let c = harness::estimate_curve(&s.model, kind(a.kind), a.a, a.b, m, &sampling)?;

    let settings = (a.kind, a.a, a.b, m, a.n, a.r, a.samples);
    let mut out = format!("# {}\n", header("curve", &settings, &a.common, &s.lattice));
    let _ = writeln!(out, "# kind={} M={m} N={} R={}", kind(a.kind), a.n, a.r);
    out.push_str("section,t,value\n");
    for (t, v) in c.grid().nodes().iter().zip(c.interpolant.values()) {
        let _ = writeln!(out, "node,{},{}", format_float(*t), format_float(*v));
    }
    for i in 0..a.samples {
        let t = if a.samples == 1 {
            0.5 * (a.a + a.b)
        } else {
            a.a + (a.b - a.a) * i as f64 / (a.samples - 1) as f64
        };
        let _ = writeln!(out, "sample,{},{}", format_float(t), format_float(c.evaluate(t)));
    }
    emit(&a.common, &out)
}

fn converge(a: &ConvergeArgs) -> CliResult<()> {
    for &n in &a.n_list {
        check_n(n)?;
    }
    check_r(a.r)?;
    let methods = a
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<Result<Vec<_>, _>>()?;
    let s = setup(&a.common)?;
    let target = match (a.t, a.a, a.b) {
        (Some(t), _, _) => StudyTarget::Point { t },
        (None, Some(lo), Some(hi)) => StudyTarget::Curve {
            a: lo,
            b: hi,
            m: a.m.map_or(MRule::Coupled, MRule::Fixed),
            reference: Some(ReferenceConfig {
                n: a.ref_n.unwrap_or(4 * a.n_list.last().copied().unwrap_or(1)),
                m: a.ref_m,
                shifts: a.ref_r,
            }),
            quad_points: a.quad_points,
        },
        _ => {
            let p = a.t_quantile.unwrap_or(0.9);
            let t = harness::locate_quantile(&s.model, p, &s.lattice, PILOT_N, a.common.seed, &s.exec)?;
            StudyTarget::Point { t }
        }
    };
    let mut study = StudyConfig::new(kind(a.kind), target.clone(), methods, a.n_list.clone(), a.r, a.common.seed);
    study.root = s.root;
    let report = convergence_study(&s.model, &study, &s.lattice, &s.exec)?;

    let mut out = Vec::new();
    let comments = vec![header("converge", &(&study, a.t_quantile), &a.common, &s.lattice)];
    report.write_csv(&mut out, &comments)?;
    emit(&a.common, &String::from_utf8_lossy(&out))?;
    match report.rows.iter().find_map(|r| r.failure.as_ref()) {
        Some(reason) => Err(Failure::Numerical(reason.clone())),
        None => Ok(()),
    }
}

fn time(a: &TimeArgs) -> CliResult<()> {
    for &n in &a.n_list {
        check_n(n)?;
    }
    let s = setup(&a.common)?;
    let rows = timing_study(&s.model, a.t, &a.n_list, &s.lattice, a.common.seed, a.repeats)?;
    let mut out = Vec::new();
    let comments = vec![header("time", &(a.t, &a.n_list, a.repeats), &a.common, &s.lattice)];
    write_timing_csv(&rows, &mut out, &comments)?;
    emit(&a.common, &String::from_utf8_lossy(&out))
}

fn check(a: &CheckArgs) -> CliResult<()> {
    check_n(a.n)?;
    let s = setup(&a.common)?;
    let settings = CheckSettings {
        n: a.n,
        seed: a.common.seed,
        fibers: a.fibers,
        root: s.root,
        ..CheckSettings::default()
    };
    let outcomes = invariant_suite(&s.model, s.covariance.as_ref(), &s.lattice, &settings)?;
    let mut out = format!("# {}\n", header("check", &(a.n, a.fibers), &a.common, &s.lattice));
    for c in &outcomes {
        let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    emit(&a.common, &out)?;
    if outcomes.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
