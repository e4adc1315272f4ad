//! Shift-averaged estimates, baselines and error measures.

mod check;
mod study;

pub use check::{invariant_suite, CheckOutcome, CheckSettings};
pub use study::{
    convergence_study, fit_slope, format_float, timing_study, write_timing_csv, ConvergenceReport, Method,
    MRule, ReferenceConfig, Slope, StudyConfig, StudyRow, StudyTarget, TimingRow,
};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::interp::{ChebyshevGrid, Interpolant};
use crate::lattice::{draw_shifts, GeneratingVector, LatticeRule, NormalLattice, PointSet, Shift};
use crate::model::Model;
use crate::preintegration::{batch_curve, pointwise_cdf, Executor, Kind, RootConfig, BLOCK_SIZE};

/// Lattice, sample size, shifts and solver settings shared by the QMC
/// estimators.
#[derive(Debug, Clone, Copy)]
pub struct Sampling<'a> {
    pub lattice: &'a GeneratingVector,
    pub n: usize,
    pub shifts: usize,
    pub seed: u64,
    pub root: RootConfig,
    pub exec: &'a Executor,
}

impl<'a> Sampling<'a> {
    pub fn new(lattice: &'a GeneratingVector, n: usize, shifts: usize, seed: u64, exec: &'a Executor) -> Self {
        Sampling {
            lattice,
            n,
            shifts,
            seed,
            root: RootConfig::default(),
            exec,
        }
    }

    fn check(&self) -> Result<()> {
        if self.shifts == 0 {
            return Err(Error::invalid("need at least one random shift"));
        }
        if self.n == 0 {
            return Err(Error::invalid("need at least one point"));
        }
        Ok(())
    }

    /// Normal-transformed lattice point sets in dimension `d`, one per shift.
    pub fn point_sets(&self, d: usize) -> Result<Vec<NormalLattice>> {
        self.check()?;
        draw_shifts(self.shifts, d, self.seed)
            .into_iter()
            .map(|shift| self.point_set(d, shift))
            .collect()
    }

    fn point_set(&self, d: usize, shift: Shift) -> Result<NormalLattice> {
        Ok(NormalLattice::new(LatticeRule::new(self.lattice, self.n, d, shift)?))
    }
}

/// A shift-averaged estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub per_shift: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over shifts divided by `sqrt(R)`; NaN for
    /// a single shift.
    pub stderr: f64,
    /// `stderr / |mean|`; NaN when the mean is 0.
    pub rel_rmse: f64,
    pub wall_time: f64,
}

impl PointEstimate {
    pub fn from_shifts(per_shift: Vec<f64>, wall_time: f64) -> Self {
        let mean = mean(&per_shift);
        let stderr = shift_stderr(&per_shift, mean);
        PointEstimate {
            per_shift,
            mean,
            stderr,
            rel_rmse: relative(stderr, mean),
            wall_time,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn shift_stderr(xs: &[f64], mean: f64) -> f64 {
    let r = xs.len();
    if r < 2 {
        return f64::NAN;
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
    (var / r as f64).sqrt()
}

fn relative(err: f64, value: f64) -> f64 {
    if value == 0.0 {
        f64::NAN
    } else {
        err / value.abs()
    }
}

/// Preintegrated cdf or pdf at `t`, averaged over `sampling.shifts` shifts.
pub fn estimate_point<M: Model>(model: &M, kind: Kind, t: f64, sampling: &Sampling) -> Result<PointEstimate> {
    let start = Instant::now();
    let mut per_shift = Vec::with_capacity(sampling.shifts);
    for pts in sampling.point_sets(model.dim())? {
        per_shift.push(batch_curve(model, kind, &[t], &pts, &sampling.root, sampling.exec)?.values[0]);
    }
    Ok(PointEstimate::from_shifts(per_shift, start.elapsed().as_secs_f64()))
}

/// Lattice rule applied directly to `ind(phi(Y) <= t)` in dimension
/// `d + 1`, without preintegration.
pub fn qmc_plain_cdf<M: Model>(model: &M, t: f64, sampling: &Sampling) -> Result<PointEstimate> {
    let start = Instant::now();
    let d = model.dim();
    let mut per_shift = Vec::with_capacity(sampling.shifts);
    for pts in sampling.point_sets(d + 1)? {
        per_shift.push(plain_indicator_mean(model, t, &pts, sampling.exec)?);
    }
    Ok(PointEstimate::from_shifts(per_shift, start.elapsed().as_secs_f64()))
}

fn plain_indicator_mean<M: Model, P: PointSet>(model: &M, t: f64, pts: &P, exec: &Executor) -> Result<f64> {
    let n = pts.len();
    let hits = exec.map(n.div_ceil(BLOCK_SIZE), |b| {
        let mut y = vec![0.0; pts.dim()];
        let mut hits = 0u64;
        for index in b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(n) {
            pts.point(index, &mut y)?;
            if model.eval(y[0], &y[1..]) <= t {
                hits += 1;
            }
        }
        Ok(hits)
    })?;
    Ok(hits.iter().sum::<u64>() as f64 / n as f64)
}

/// Plain Monte Carlo for the cdf with `total` i.i.d. standard normal
/// samples pooled into one estimate. The pdf has no plain Monte Carlo
/// counterpart: `E[delta(t - phi(Y))]` is not an expectation of a function.
pub fn mc_baseline<M: Model>(model: &M, t: f64, total: usize, seed: u64, exec: &Executor) -> Result<PointEstimate> {
    if total < 2 {
        return Err(Error::invalid("Monte Carlo needs at least two samples"));
    }
    let start = Instant::now();
    let dim = model.dim() + 1;
    let hits = exec.map(total.div_ceil(BLOCK_SIZE), |b| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ MC_SEED_TAG);
        rng.set_stream(b as u64);
        let mut y = vec![0.0; dim];
        let mut hits = 0u64;
        for _ in b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(total) {
            for v in y.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            if model.eval(y[0], &y[1..]) <= t {
                hits += 1;
            }
        }
        Ok(hits)
    })?;
    let n = total as f64;
    let p = hits.iter().sum::<u64>() as f64 / n;
    let stderr = (p * (1.0 - p) * n / (n - 1.0)).sqrt() / n.sqrt();
    Ok(PointEstimate {
        per_shift: vec![p],
        mean: p,
        stderr,
        rel_rmse: relative(stderr, p),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Keeps Monte Carlo streams apart from the shift streams of the same seed.
const MC_SEED_TAG: u64 = 0x6d63_5f62_6173_656c;

/// A Chebyshev interpolant of shift-averaged node estimates together with
/// the per-shift interpolants.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub interpolant: Interpolant,
    pub per_shift: Vec<Interpolant>,
    pub kind: Kind,
    pub n: usize,
    pub seed: u64,
    pub wall_time: f64,
}

impl CurveEstimate {
    /// Averages per-shift interpolants on a common grid.
    pub fn from_shifts(per_shift: Vec<Interpolant>, kind: Kind, n: usize, seed: u64) -> Result<Self> {
        let first = per_shift
            .first()
            .ok_or_else(|| Error::invalid("need at least one per-shift curve"))?;
        let grid = first.grid().clone();
        if per_shift.iter().any(|p| p.grid() != &grid) {
            return Err(Error::invalid("per-shift curves live on different grids"));
        }
        let values = (0..grid.nodes().len())
            .map(|k| mean(&per_shift.iter().map(|p| p.values()[k]).collect::<Vec<_>>()))
            .collect();
        Ok(CurveEstimate {
            interpolant: Interpolant::new(grid, values)?,
            per_shift,
            kind,
            n,
            seed,
            wall_time: 0.0,
        })
    }

    pub fn grid(&self) -> &ChebyshevGrid {
        self.interpolant.grid()
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.interpolant.evaluate(t)
    }

    /// Shift-averaged estimate at `t` with its standard error.
    pub fn point(&self, t: f64) -> PointEstimate {
        PointEstimate::from_shifts(self.per_shift.iter().map(|p| p.evaluate(t)).collect(), self.wall_time)
    }
}

/// Node estimates on `ChebyshevGrid(a, b, m)` from the batched estimator,
/// one interpolant per shift.
pub fn estimate_curve<M: Model>(
    model: &M,
    kind: Kind,
    a: f64,
    b: f64,
    m: usize,
    sampling: &Sampling,
) -> Result<CurveEstimate> {
    let start = Instant::now();
    let grid = ChebyshevGrid::new(a, b, m)?;
    let mut per_shift = Vec::with_capacity(sampling.shifts);
    for pts in sampling.point_sets(model.dim())? {
        let out = batch_curve(model, kind, grid.nodes(), &pts, &sampling.root, sampling.exec)?;
        per_shift.push(Interpolant::new(grid.clone(), out.values)?);
    }
    let mut curve = CurveEstimate::from_shifts(per_shift, kind, sampling.n, sampling.seed)?;
    curve.wall_time = start.elapsed().as_secs_f64();
    Ok(curve)
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss-Legendre rule with `quad_points / 8` equal panels.
pub fn gauss_legendre(a: f64, b: f64, quad_points: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    if quad_points == 0 || quad_points % 8 != 0 {
        return Err(Error::invalid(format!(
            "quadrature size {quad_points} must be a positive multiple of 8"
        )));
    }
    let panels = quad_points / 8;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (&x, &w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
            s += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += half * s;
    }
    Ok(total)
}

/// Default number of quadrature nodes for [`estimate_rmise`].
pub const DEFAULT_QUAD_POINTS: usize = 256;

/// `sqrt(mean_r int_a^b (curve_r - reference)^2 dt)` over the per-shift
/// curves of `curve`, against the averaged reference curve.
pub fn estimate_rmise(curve: &CurveEstimate, reference: &CurveEstimate, quad_points: usize) -> Result<f64> {
    let (a, b) = curve.grid().interval();
    if reference.grid().interval() != (a, b) {
        let (ra, rb) = reference.grid().interval();
        return Err(Error::invalid(format!(
            "curve lives on [{a}, {b}] but the reference on [{ra}, {rb}]"
        )));
    }
    let mut total = 0.0;
    for shift in &curve.per_shift {
        total += gauss_legendre(a, b, quad_points, |t| {
            (shift.evaluate(t) - reference.evaluate(t)).powi(2)
        })?;
    }
    Ok((total / curve.per_shift.len() as f64).sqrt())
}

/// L2 norm of the averaged curve on its interval.
pub fn curve_l2_norm(curve: &CurveEstimate, quad_points: usize) -> Result<f64> {
    let (a, b) = curve.grid().interval();
    Ok(gauss_legendre(a, b, quad_points, |t| curve.evaluate(t).powi(2))?.sqrt())
}

/// Level `t` with estimated cdf `p`, by bisection on a preintegrated cdf
/// estimate from one shifted lattice with `n` points.
pub fn locate_quantile<M: Model>(
    model: &M,
    p: f64,
    lattice: &GeneratingVector,
    n: usize,
    seed: u64,
    exec: &Executor,
) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probability {p} must lie in (0, 1)")));
    }
    let sampling = Sampling::new(lattice, n, 1, seed, exec);
    let pts = sampling.point_sets(model.dim())?.pop().expect("one shift");
    let cfg = RootConfig::default();
    let cdf = |t: f64| pointwise_cdf(model, t, &pts, &cfg, exec);

    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut step = 2.0;
    while cdf(lo)? > p {
        lo -= step;
        step *= 2.0;
        if !lo.is_finite() {
            return Err(Error::invalid("cannot bracket the quantile from below"));
        }
    }
    step = 2.0;
    while cdf(hi)? < p {
        hi += step;
        step *= 2.0;
        if !hi.is_finite() {
            return Err(Error::invalid("cannot bracket the quantile from above"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-12 * (1.0 + mid.abs()) {
            break;
        }
        if cdf(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
