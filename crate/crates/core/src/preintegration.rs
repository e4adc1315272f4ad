//! Preintegrated cdf and pdf estimators.
//!
//! For a fiber `phi(., y)` and level `t` the root `xi(t, y)` of
//! `phi(xi, y) = t` turns the discontinuous integrand `ind(t - phi)` into
//! `Phi(xi)` (cdf) and `rho(xi) / D^0 phi(xi, y)` (pdf), both smooth in `y`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gaussian;
use crate::lattice::PointSet;
use crate::model::{Fiber, Model};

/// Points per accumulation block. Blocks are summed independently and merged
/// in index order, so results do not depend on the number of workers.
pub const BLOCK_SIZE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    /// Stop once `|phi(xi) - t| <= tol`.
    pub tol: f64,
    pub max_newton: usize,
    pub max_bracket_expansions: usize,
    pub initial_guess: f64,
    /// In batch mode, start the search at node `m + 1` from the root found
    /// at node `m`.
    pub warm_start: bool,
    /// For fibers bounded below by 0 and `t > 0`, take Newton steps on
    /// `ln phi - ln t` instead of `phi - t`. The stopping rule is unchanged.
    pub log_newton: bool,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            tol: 1e-10,
            max_newton: 100,
            max_bracket_expansions: 60,
            initial_guess: 0.0,
            warm_start: true,
            log_newton: true,
        }
    }
}

impl RootConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("root tolerance must be positive, got {}", self.tol)));
        }
        if self.max_newton == 0 {
            return Err(Error::invalid("max_newton must be at least 1"));
        }
        if !self.initial_guess.is_finite() {
            return Err(Error::invalid("initial guess must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootResult {
    Root { xi: f64, iterations: usize },
    /// `t` is at or below the fiber's lower limit.
    NoRoot,
    Failed(String),
}

impl RootResult {
    pub fn root(&self) -> Option<f64> {
        match *self {
            RootResult::Root { xi, .. } => Some(xi),
            _ => None,
        }
    }
}

/// Safeguarded Newton iteration for `fiber(xi) = t` starting at
/// `cfg.initial_guess`.
pub fn find_xi<F: Fiber + ?Sized>(fiber: &F, t: f64, cfg: &RootConfig) -> RootResult {
    find_xi_from(fiber, t, cfg, cfg.initial_guess)
}

/// As [`find_xi`], starting at `start`.
///
/// A bracket `lo < xi < hi` with `phi(lo) < t < phi(hi)` is tightened at
/// every iterate. Newton steps are taken when they land strictly inside the
/// bracket and, once the bracket is closed, at most half as long as the
/// step before last; otherwise the midpoint is used, or, while one side is
/// still open, a step of doubling length towards it. Steps towards an open
/// side are never longer than that doubling step. Non-finite values count
/// as `phi > t`.
pub fn find_xi_from<F: Fiber + ?Sized>(fiber: &F, t: f64, cfg: &RootConfig, start: f64) -> RootResult {
    if t.is_nan() {
        return RootResult::Failed("level t is NaN".into());
    }
    if t <= fiber.lower_limit() {
        return RootResult::NoRoot;
    }
    let log_space = cfg.log_newton && t > 0.0 && fiber.lower_limit() >= 0.0;
    let log_t = t.ln();
    let mut x = start;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut step = 1.0;
    let mut expansions = 0;
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;
    let mut older_step = f64::INFINITY;

    loop {
        let (f, df) = fiber.eval_deriv(x);
        let g = if f.is_finite() { f - t } else { f64::INFINITY };
        if g.abs() <= cfg.tol {
            return RootResult::Root { xi: x, iterations };
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if iterations == cfg.max_newton {
            return RootResult::Failed(format!(
                "no convergence after {iterations} iterations (x = {x}, residual = {g:e})"
            ));
        }

        let newton = if !(g.is_finite() && df > 0.0 && df.is_finite()) {
            f64::NAN
        } else if log_space {
            x - (f.ln() - log_t) * (f / df)
        } else {
            x - g / df
        };
        let inside = newton > lo && newton < hi;
        let next = if lo.is_finite() && hi.is_finite() {
            if inside && (newton - x).abs() <= 0.5 * older_step {
                newton
            } else {
                let mid = 0.5 * (lo + hi);
                if !(mid > lo && mid < hi) {
                    return RootResult::Failed(format!("bracket [{lo}, {hi}] collapsed"));
                }
                mid
            }
        } else if hi.is_infinite() && (!inside || newton > x + step) {
            expansions += 1;
            let y = x + step;
            step *= 2.0;
            y
        } else if lo.is_infinite() && (!inside || newton < x - step) {
            expansions += 1;
            let y = x - step;
            step *= 2.0;
            y
        } else {
            newton
        };
        if expansions > cfg.max_bracket_expansions {
            return RootResult::Failed(format!(
                "no bracket after {} expansions",
                cfg.max_bracket_expansions
            ));
        }
        iterations += 1;
        older_step = last_step;
        last_step = (next - x).abs();
        x = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Cdf,
    Pdf,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Cdf => "cdf",
            Kind::Pdf => "pdf",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cdf" => Ok(Kind::Cdf),
            "pdf" => Ok(Kind::Pdf),
            _ => Err(Error::invalid(format!("unknown estimator kind {s:?} (expected cdf or pdf)"))),
        }
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let s = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - s) + x;
        } else {
            self.comp += (x - s) + self.sum;
        }
        self.sum = s;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Runs index-addressed jobs sequentially or on a dedicated thread pool.
/// Results always come back in index order.
pub struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl fmt::Debug for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Executor({} workers)", self.workers())
    }
}

impl Default for Executor {
    fn default() -> Self {
        Executor::sequential()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor { pool: None }
    }

    /// `workers = 0` uses every available core; `1` is sequential.
    pub fn with_workers(workers: usize) -> Result<Self> {
        if workers == 1 {
            return Ok(Executor::sequential());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
        Ok(Executor { pool: Some(pool) })
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Evaluates `job(0..jobs)`; on failure returns the error of the lowest
    /// failing index.
    pub fn map<T, F>(&self, jobs: usize, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync,
    {
        match &self.pool {
            None => (0..jobs).map(job).collect(),
            Some(pool) => {
                use rayon::prelude::*;
                let out: Vec<Result<T>> = pool.install(|| (0..jobs).into_par_iter().map(&job).collect());
                out.into_iter().collect()
            }
        }
    }
}

/// Counters gathered by [`batch_curve`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BatchStats {
    pub fibers_built: u64,
    pub newton_iterations: u64,
    pub roots: u64,
    pub no_root: u64,
}

impl BatchStats {
    fn merge(&mut self, other: &BatchStats) {
        self.fibers_built += other.fibers_built;
        self.newton_iterations += other.newton_iterations;
        self.roots += other.roots;
        self.no_root += other.no_root;
    }
}

/// Estimates at every node for one point set.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub values: Vec<f64>,
    pub stats: BatchStats,
}

/// `(1/N) sum_n Phi(xi(t, tau_n))`; points whose fiber stays above `t`
/// contribute 0.
pub fn pointwise_cdf<M: Model, P: PointSet>(
    model: &M,
    t: f64,
    points: &P,
    cfg: &RootConfig,
    exec: &Executor,
) -> Result<f64> {
    Ok(batch_curve(model, Kind::Cdf, &[t], points, cfg, exec)?.values[0])
}

/// `(1/N) sum_n rho(xi) / D^0 phi(xi, tau_n)`; points whose fiber stays
/// above `t` contribute 0.
pub fn pointwise_pdf<M: Model, P: PointSet>(
    model: &M,
    t: f64,
    points: &P,
    cfg: &RootConfig,
    exec: &Executor,
) -> Result<f64> {
    Ok(batch_curve(model, Kind::Pdf, &[t], points, cfg, exec)?.values[0])
}

/// Estimates at all `nodes` at once. Each fiber is built once per point and
/// then solved for every node in the given order.
pub fn batch_curve<M: Model, P: PointSet>(
    model: &M,
    kind: Kind,
    nodes: &[f64],
    points: &P,
    cfg: &RootConfig,
    exec: &Executor,
) -> Result<BatchOutput> {
    cfg.validate()?;
    if points.dim() != model.dim() {
        return Err(Error::invalid(format!(
            "point set has dimension {}, model needs {}",
            points.dim(),
            model.dim()
        )));
    }
    if nodes.iter().any(|t| t.is_nan()) {
        return Err(Error::invalid("levels must not be NaN"));
    }
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("empty point set"));
    }
    let blocks = n.div_ceil(BLOCK_SIZE);

    let partial = exec.map(blocks, |b| {
        let mut sums = vec![CompensatedSum::default(); nodes.len()];
        let mut stats = BatchStats::default();
        let mut y = vec![0.0; points.dim()];
        for index in b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(n) {
            points.point(index, &mut y)?;
            let fiber = model.fiber(&y);
            stats.fibers_built += 1;
            let mut previous: Option<f64> = None;
            for (&t, sum) in nodes.iter().zip(sums.iter_mut()) {
                let start = match previous {
                    Some(xi) if cfg.warm_start => xi,
                    _ => cfg.initial_guess,
                };
                match find_xi_from(&fiber, t, cfg, start) {
                    RootResult::Root { xi, iterations } => {
                        stats.roots += 1;
                        stats.newton_iterations += iterations as u64;
                        previous = Some(xi);
                        sum.add(integrand(&fiber, kind, xi).map_err(|reason| Error::RootFailure {
                            index,
                            t,
                            reason,
                        })?);
                    }
                    RootResult::NoRoot => {
                        stats.no_root += 1;
                        previous = None;
                    }
                    RootResult::Failed(reason) => return Err(Error::RootFailure { index, t, reason }),
                }
            }
        }
        Ok((sums, stats))
    })?;

    let mut totals = vec![CompensatedSum::default(); nodes.len()];
    let mut stats = BatchStats::default();
    for (sums, s) in &partial {
        for (total, part) in totals.iter_mut().zip(sums) {
            total.merge(part);
        }
        stats.merge(s);
    }
    let inv = n as f64;
    Ok(BatchOutput {
        values: totals.iter().map(|s| s.value() / inv).collect(),
        stats,
    })
}

#[inline]
fn integrand<F: Fiber>(fiber: &F, kind: Kind, xi: f64) -> std::result::Result<f64, String> {
    match kind {
        Kind::Cdf => Ok(gaussian::cdf(xi)),
        Kind::Pdf => {
            let slope = fiber.deriv(xi);
            if slope > 0.0 && slope.is_finite() {
                Ok(gaussian::pdf(xi) / slope)
            } else {
                Err(format!("D0 phi = {slope} at xi = {xi}; the model is not monotone here"))
            }
        }
    }
}
