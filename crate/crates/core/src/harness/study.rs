//! Convergence and timing studies with CSV output.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use super::{
    curve_l2_norm, estimate_curve, estimate_point, estimate_rmise, mc_baseline, qmc_plain_cdf, PointEstimate,
    Sampling, DEFAULT_QUAD_POINTS,
};
use crate::error::{Error, Result};
use crate::lattice::GeneratingVector;
use crate::model::Model;
use crate::preintegration::{Executor, Kind, RootConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Plain Monte Carlo with `R * N` pooled samples.
    Mc,
    /// The lattice rule on the indicator, without preintegration.
    QmcPlain,
    QmcPreint,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::QmcPlain => "qmc_plain",
            Method::QmcPreint => "qmc_preint",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Method::Mc),
            "qmc_plain" => Ok(Method::QmcPlain),
            "qmc_preint" => Ok(Method::QmcPreint),
            _ => Err(Error::invalid(format!(
                "unknown method {s:?} (expected mc, qmc_plain or qmc_preint)"
            ))),
        }
    }
}

/// Interpolation degree as a function of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MRule {
    /// `ceil(N^(1/4)) + 10`.
    Coupled,
    Fixed(usize),
}

impl MRule {
    pub fn degree(self, n: usize) -> usize {
        match self {
            MRule::Fixed(m) => m,
            MRule::Coupled => {
                let mut m = (n as f64).powf(0.25).floor() as usize;
                while m.pow(4) < n {
                    m += 1;
                }
                while m > 0 && (m - 1).pow(4) >= n {
                    m -= 1;
                }
                m + 10
            }
        }
    }
}

/// The high-accuracy curve that RMISE is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceConfig {
    pub n: usize,
    pub m: usize,
    pub shifts: usize,
}

impl ReferenceConfig {
    /// Four times the largest study `N`, `M = 42`, 16 shifts.
    pub fn default_for(n_max: usize) -> Self {
        ReferenceConfig {
            n: 4 * n_max,
            m: 42,
            shifts: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StudyTarget {
    Point {
        t: f64,
    },
    Curve {
        a: f64,
        b: f64,
        m: MRule,
        reference: Option<ReferenceConfig>,
        quad_points: usize,
    },
}

impl StudyTarget {
    pub fn curve(a: f64, b: f64) -> Self {
        StudyTarget::Curve {
            a,
            b,
            m: MRule::Coupled,
            reference: None,
            quad_points: DEFAULT_QUAD_POINTS,
        }
    }

    fn label(&self) -> String {
        match *self {
            StudyTarget::Point { t } => format_float(t),
            StudyTarget::Curve { a, b, .. } => format!("{}:{}", format_float(a), format_float(b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub kind: Kind,
    pub target: StudyTarget,
    pub methods: Vec<Method>,
    pub n_list: Vec<usize>,
    pub shifts: usize,
    pub seed: u64,
    pub root: RootConfig,
    /// Rows with smaller `N` are left out of the slope fit.
    pub slope_min_n: usize,
}

impl StudyConfig {
    pub fn new(kind: Kind, target: StudyTarget, methods: Vec<Method>, n_list: Vec<usize>, shifts: usize, seed: u64) -> Self {
        StudyConfig {
            kind,
            target,
            methods,
            n_list,
            shifts,
            seed,
            root: RootConfig::default(),
            slope_min_n: 1 << 12,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::invalid("the N list is empty"));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("N values must be strictly increasing"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods selected"));
        }
        if self.shifts == 0 {
            return Err(Error::invalid("need at least one shift"));
        }
        for &m in &self.methods {
            if m != Method::QmcPreint && self.kind == Kind::Pdf {
                return Err(Error::invalid(format!(
                    "{m} has no pdf estimator; only qmc_preint estimates the density"
                )));
            }
            if m != Method::QmcPreint && matches!(self.target, StudyTarget::Curve { .. }) {
                return Err(Error::invalid(format!("{m} does not produce curves; use qmc_preint")));
            }
        }
        Ok(())
    }
}

/// One `(method, N)` result.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub method: Method,
    pub n: usize,
    pub m: Option<usize>,
    pub target: String,
    pub estimate: f64,
    pub stderr: f64,
    /// Point studies: `stderr / |estimate|`. Curve studies: RMISE divided
    /// by the L2 norm of the reference curve.
    pub rel_rmse: f64,
    pub rmise: f64,
    pub wall_time: f64,
    pub failure: Option<String>,
}

impl StudyRow {
    fn failed(method: Method, n: usize, m: Option<usize>, target: String, err: &Error) -> Self {
        StudyRow {
            method,
            n,
            m,
            target,
            estimate: f64::NAN,
            stderr: f64::NAN,
            rel_rmse: f64::NAN,
            rmise: f64::NAN,
            wall_time: f64::NAN,
            failure: Some(err.to_string()),
        }
    }

    /// The error measure the slope is fitted to.
    pub fn error_measure(&self) -> f64 {
        if self.rmise.is_nan() {
            self.rel_rmse
        } else {
            self.rmise
        }
    }
}

/// Least-squares slope of `log2(error)` against `log2(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slope {
    pub method: Method,
    /// NaN when the errors are exactly zero or fewer than two rows qualify.
    pub value: f64,
    pub exact: bool,
    pub window: Option<(usize, usize)>,
}

impl Slope {
    fn window_label(&self) -> String {
        self.window.map_or_else(String::new, |(lo, hi)| format!("{lo}..{hi}"))
    }
}

/// Least-squares slope through `(log2 x, log2 y)`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let k = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.log2(), y.log2())).unzip();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<StudyRow>,
    pub slopes: Vec<Slope>,
}

impl ConvergenceReport {
    pub fn slope(&self, method: Method) -> Option<&Slope> {
        self.slopes.iter().find(|s| s.method == method)
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// Writes `comments` as `#` lines, the header, one line per row and one
    /// `# slope` line per method.
    pub fn write_csv<W: Write>(&self, out: &mut W, comments: &[String]) -> io::Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "method,N,M,t_or_interval,estimate,stderr,rel_rmse,rmise,slope_window,wall_time_s")?;
        for row in &self.rows {
            let m = row.m.map_or_else(String::new, |m| m.to_string());
            let window = self
                .slope(row.method)
                .filter(|s| s.window.is_some_and(|(lo, hi)| (lo..=hi).contains(&row.n)))
                .map_or_else(String::new, Slope::window_label);
            let num = |x: f64| {
                if row.failure.is_some() {
                    "failed".to_owned()
                } else {
                    format_float(x)
                }
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                row.method,
                row.n,
                m,
                row.target,
                num(row.estimate),
                num(row.stderr),
                num(row.rel_rmse),
                num(row.rmise),
                window,
                num(row.wall_time)
            )?;
        }
        for s in &self.slopes {
            let value = if s.exact { "exact".to_owned() } else { format_float(s.value) };
            writeln!(out, "# slope {} {} window {}", s.method, value, s.window_label())?;
        }
        for row in self.rows.iter().filter(|r| r.failure.is_some()) {
            writeln!(
                out,
                "# failed {} N={}: {}",
                row.method,
                row.n,
                row.failure.as_deref().unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

/// Runs every method at every `N`. Failed estimates become rows marked as
/// failed; they are excluded from the slope fit.
pub fn convergence_study<M: Model>(
    model: &M,
    config: &StudyConfig,
    lattice: &GeneratingVector,
    exec: &Executor,
) -> Result<ConvergenceReport> {
    config.validate()?;
    let label = config.target.label();
    let mut rows = Vec::new();

    let reference = match config.target {
        StudyTarget::Curve { a, b, reference, quad_points, .. } => {
            let n_max = *config.n_list.last().expect("validated");
            let rc = reference.unwrap_or_else(|| ReferenceConfig::default_for(n_max));
            let mut sampling = Sampling::new(lattice, rc.n, rc.shifts, reference_seed(config.seed), exec);
            sampling.root = config.root;
            let curve = estimate_curve(model, config.kind, a, b, rc.m, &sampling)?;
            let norm = curve_l2_norm(&curve, quad_points)?;
            Some((curve, norm))
        }
        StudyTarget::Point { .. } => None,
    };

    for &method in &config.methods {
        for &n in &config.n_list {
            let mut sampling = Sampling::new(lattice, n, config.shifts, config.seed, exec);
            sampling.root = config.root;
            let row = match config.target {
                StudyTarget::Point { t } => {
                    let est = match method {
                        Method::QmcPreint => estimate_point(model, config.kind, t, &sampling),
                        Method::QmcPlain => qmc_plain_cdf(model, t, &sampling),
                        Method::Mc => mc_baseline(model, t, n * config.shifts, config.seed, exec),
                    };
                    match est {
                        Ok(e) => point_row(method, n, label.clone(), &e),
                        Err(e) => StudyRow::failed(method, n, None, label.clone(), &e),
                    }
                }
                StudyTarget::Curve { a, b, m, quad_points, .. } => {
                    let degree = m.degree(n);
                    let (reference, norm) = reference.as_ref().expect("built above");
                    let start = Instant::now();
                    let result = estimate_curve(model, config.kind, a, b, degree, &sampling).and_then(|curve| {
                        let rmise = estimate_rmise(&curve, reference, quad_points)?;
                        Ok((curve, rmise))
                    });
                    match result {
                        Ok((curve, rmise)) => {
                            let mid = curve.point(0.5 * (a + b));
                            StudyRow {
                                method,
                                n,
                                m: Some(degree),
                                target: label.clone(),
                                estimate: mid.mean,
                                stderr: mid.stderr,
                                rel_rmse: if *norm > 0.0 { rmise / norm } else { f64::NAN },
                                rmise,
                                wall_time: start.elapsed().as_secs_f64(),
                                failure: None,
                            }
                        }
                        Err(e) => StudyRow::failed(method, n, Some(degree), label.clone(), &e),
                    }
                }
            };
            rows.push(row);
        }
    }

    let slopes = config
        .methods
        .iter()
        .map(|&method| {
            let usable: Vec<&StudyRow> = rows
                .iter()
                .filter(|r| r.method == method && r.n >= config.slope_min_n && r.failure.is_none())
                .collect();
            let window = match (usable.first(), usable.last()) {
                (Some(lo), Some(hi)) => Some((lo.n, hi.n)),
                _ => None,
            };
            let exact = !usable.is_empty() && usable.iter().any(|r| r.error_measure() == 0.0);
            let value = if exact {
                f64::NAN
            } else {
                let pts: Vec<(f64, f64)> = usable.iter().map(|r| (r.n as f64, r.error_measure())).collect();
                if pts.iter().all(|p| p.1.is_finite()) {
                    fit_slope(&pts)
                } else {
                    f64::NAN
                }
            };
            Slope {
                method,
                value,
                exact,
                window,
            }
        })
        .collect();

    Ok(ConvergenceReport { rows, slopes })
}

/// The reference curve uses shifts independent of the study's.
fn reference_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9e37_79b9_7f4a_7c15)
}

fn point_row(method: Method, n: usize, target: String, e: &PointEstimate) -> StudyRow {
    StudyRow {
        method,
        n,
        m: None,
        target,
        estimate: e.mean,
        stderr: e.stderr,
        rel_rmse: e.rel_rmse,
        rmise: f64::NAN,
        wall_time: e.wall_time,
        failure: None,
    }
}

/// Single-worker wall times at one level `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub qmc_cdf: f64,
    pub preint_cdf: f64,
    pub preint_pdf: f64,
    /// `preint_cdf / qmc_cdf`.
    pub increase_factor: f64,
}

/// Times plain lattice cdf, preintegrated cdf and preintegrated pdf with one
/// shift on one worker, keeping the fastest of `repeats` runs.
pub fn timing_study<M: Model>(
    model: &M,
    t: f64,
    n_list: &[usize],
    lattice: &GeneratingVector,
    seed: u64,
    repeats: usize,
) -> Result<Vec<TimingRow>> {
    let exec = Executor::sequential();
    let repeats = repeats.max(1);
    let time = |f: &dyn Fn() -> Result<()>| -> Result<f64> {
        let start = Instant::now();
        f()?;
        Ok(start.elapsed().as_secs_f64())
    };
    n_list
        .iter()
        .map(|&n| {
            let sampling = Sampling::new(lattice, n, 1, seed, &exec);
            let mut best = [f64::INFINITY; 3];
            // Interleaved so that slow drift affects all three alike.
            for _ in 0..repeats {
                best[0] = best[0].min(time(&|| qmc_plain_cdf(model, t, &sampling).map(drop))?);
                best[1] = best[1].min(time(&|| estimate_point(model, Kind::Cdf, t, &sampling).map(drop))?);
                best[2] = best[2].min(time(&|| estimate_point(model, Kind::Pdf, t, &sampling).map(drop))?);
            }
            let [qmc_cdf, preint_cdf, preint_pdf] = best;
            Ok(TimingRow {
                n,
                qmc_cdf,
                preint_cdf,
                preint_pdf,
                increase_factor: preint_cdf / qmc_cdf,
            })
        })
        .collect()
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: &mut W, comments: &[String]) -> io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "N,qmc_cdf_s,preint_cdf_s,preint_pdf_s,increase_factor")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            format_float(r.qmc_cdf),
            format_float(r.preint_cdf),
            format_float(r.preint_pdf),
            format_float(r.increase_factor)
        )?;
    }
    Ok(())
}

/// 17 significant digits in scientific notation; `NaN`, `inf` and `-inf`
/// otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{x:.16e}")
    }
}
