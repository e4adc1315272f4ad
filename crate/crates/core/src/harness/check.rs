//! Invariant checks on a configured model and lattice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::locate_quantile;
use crate::error::Result;
use crate::gaussian;
use crate::interp::{ChebyshevGrid, Interpolant};
use crate::lattice::{draw_shifts, GeneratingVector, LatticeRule, NormalLattice, Shift};
use crate::model::{check_monotone, pca_factorize, CovarianceSpec, Fiber, Model};
use crate::preintegration::{batch_curve, find_xi, Executor, Kind, RootConfig, RootResult};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSettings {
    /// Lattice size for the estimator checks.
    pub n: usize,
    pub seed: u64,
    /// Random fibers for the root-finder check.
    pub fibers: usize,
    /// Worker counts compared in the determinism check.
    pub workers: Vec<usize>,
    pub root: RootConfig,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            n: 1 << 10,
            seed: 1,
            fibers: 10_000,
            workers: vec![1, 2, 4],
            root: RootConfig::default(),
        }
    }
}

/// Runs the invariant checks. `covariance`, when given, is the matrix the
/// model's factor was computed from.
pub fn invariant_suite<M: Model>(
    model: &M,
    covariance: Option<&CovarianceSpec>,
    lattice: &GeneratingVector,
    settings: &CheckSettings,
) -> Result<Vec<CheckOutcome>> {
    let exec = Executor::sequential();
    let d = model.dim();
    let mut out = vec![lattice_group(lattice, settings.n, (d + 1).min(lattice.d_max()), settings.seed)?];
    out.push(gaussian_round_trip());
    if let Some(cov) = covariance {
        out.push(factorization(cov)?);
    }

    let lo = locate_quantile(model, 0.01, lattice, settings.n, settings.seed, &exec)?;
    let hi = locate_quantile(model, 0.99, lattice, settings.n, settings.seed, &exec)?;
    out.push(root_residuals(model, lo, hi, settings));

    let shift = draw_shifts(1, d, settings.seed).pop().expect("one shift");
    let pts = NormalLattice::new(LatticeRule::new(lattice, settings.n, d, shift)?);
    let grid = ChebyshevGrid::new(lo, hi, 16)?;
    let cdf = batch_curve(model, Kind::Cdf, grid.nodes(), &pts, &settings.root, &exec)?.values;
    let in_range = cdf.iter().all(|v| (0.0..=1.0).contains(v));
    // Nodes decrease, so the estimates must not increase.
    let monotone = cdf.windows(2).all(|w| w[0] >= w[1]);
    out.push(CheckOutcome::new(
        "cdf estimate monotone in t and within [0, 1]",
        in_range && monotone,
        format!("{} nodes on [{lo:.6}, {hi:.6}]", cdf.len()),
    ));

    let pdf = batch_curve(model, Kind::Pdf, grid.nodes(), &pts, &settings.root, &exec)?.values;
    out.push(CheckOutcome::new(
        "pdf estimate nonnegative and finite",
        pdf.iter().all(|v| v.is_finite() && *v >= 0.0),
        format!("min {:.3e}", pdf.iter().copied().fold(f64::INFINITY, f64::min)),
    ));

    let mut worst = 0.0f64;
    for (k, &t) in grid.nodes().iter().enumerate() {
        let single = batch_curve(model, Kind::Cdf, &[t], &pts, &settings.root, &exec)?.values[0];
        worst = worst.max((single - cdf[k]).abs());
    }
    out.push(CheckOutcome::new(
        "batched and pointwise estimates agree",
        worst <= 1e-8,
        format!("max difference {worst:.3e}"),
    ));

    let mid = 0.5 * (lo + hi);
    let mut values = Vec::new();
    for &w in &settings.workers {
        let exec = Executor::with_workers(w)?;
        values.push(batch_curve(model, Kind::Pdf, &[lo, mid, hi], &pts, &settings.root, &exec)?.values);
    }
    out.push(CheckOutcome::new(
        "estimates independent of worker count",
        values.windows(2).all(|w| w[0] == w[1]),
        format!("workers {:?}", settings.workers),
    ));

    out.push(polynomial_reproduction(lo, hi, settings.seed)?);
    Ok(out)
}

fn lattice_group(z: &GeneratingVector, n: usize, d: usize, seed: u64) -> Result<CheckOutcome> {
    let rule = LatticeRule::new(z, n, d, Shift::zero(d))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut a, mut b, mut c) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut ok = true;
    for _ in 0..500 {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        rule.point(i, &mut a);
        rule.point(j, &mut b);
        rule.point((i + j) % n, &mut c);
        for k in 0..d {
            let s = a[k] + b[k];
            let s = if s >= 1.0 { s - 1.0 } else { s };
            let gap = (s - c[k]).abs();
            ok &= gap.min(1.0 - gap) <= 1e-12;
        }
    }
    Ok(CheckOutcome::new(
        "lattice points form a group under addition mod 1",
        ok,
        format!("N = {n}, d = {d}, 500 pairs"),
    ))
}

fn gaussian_round_trip() -> CheckOutcome {
    let mut worst = 0.0f64;
    for i in 0..=10_000 {
        let y = -6.0 + 12.0 * i as f64 / 10_000.0;
        let back = gaussian::quantile(gaussian::cdf(y)).map_or(f64::INFINITY, |q| (q - y).abs());
        worst = worst.max(back);
    }
    CheckOutcome::new(
        "normal quantile inverts the cdf on [-6, 6]",
        worst <= 1e-8,
        format!("max error {worst:.3e}"),
    )
}

fn factorization(cov: &CovarianceSpec) -> Result<CheckOutcome> {
    let a = pca_factorize(cov)?;
    let resid = a.matrix().gram().max_abs_diff(&cov.matrix());
    let mono = check_monotone(&a);
    Ok(CheckOutcome::new(
        "PCA factor reproduces the covariance and is monotone in y0",
        resid <= 1e-10 && mono.monotone,
        format!("max |A A^T - Sigma| = {resid:.3e}; {}", mono.message),
    ))
}

fn root_residuals<M: Model>(model: &M, lo: f64, hi: f64, settings: &CheckSettings) -> CheckOutcome {
    let mut rng = ChaCha20Rng::seed_from_u64(settings.seed);
    rng.set_stream(1);
    let mut y = vec![0.0; model.dim()];
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    let mut iterations = Vec::with_capacity(settings.fibers);
    for _ in 0..settings.fibers {
        for v in y.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let t = lo + (hi - lo) * rng.random::<f64>();
        let fiber = model.fiber(&y);
        match find_xi(&fiber, t, &settings.root) {
            RootResult::Root { xi, iterations: it } => {
                worst = worst.max((fiber.eval(xi) - t).abs());
                iterations.push(it);
            }
            RootResult::NoRoot => {}
            RootResult::Failed(_) => failures += 1,
        }
    }
    iterations.sort_unstable();
    let median = iterations.get(iterations.len() / 2).copied().unwrap_or(0);
    CheckOutcome::new(
        "root finder converges with residual within tolerance",
        failures == 0 && worst <= settings.root.tol,
        format!(
            "{} fibers, {failures} failures, max residual {worst:.3e}, median iterations {median}",
            settings.fibers
        ),
    )
}

fn polynomial_reproduction(a: f64, b: f64, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let m = 20;
    let coeffs: Vec<f64> = (0..=m).map(|_| rng.random_range(-1.0..1.0)).collect();
    // Polynomial in the scaled variable keeps the coefficients meaningful.
    let poly = |t: f64| {
        let s = (2.0 * t - a - b) / (b - a);
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    };
    let p = Interpolant::from_fn(ChebyshevGrid::new(a, b, m)?, poly);
    let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let worst = (0..1000)
        .map(|i| a + (b - a) * i as f64 / 999.0)
        .map(|t| (p.evaluate(t) - poly(t)).abs())
        .fold(0.0, f64::max)
        / scale;
    Ok(CheckOutcome::new(
        "interpolation reproduces polynomials of degree M",
        worst <= 1e-11,
        format!("M = {m}, relative error {worst:.3e}"),
    ))
}
