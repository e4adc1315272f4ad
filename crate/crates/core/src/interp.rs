//! Polynomial interpolation at Chebyshev points of the second kind,
//! evaluated with the barycentric formula.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `M + 1` Chebyshev extrema `(a+b)/2 + (b-a)/2 cos(k pi / M)` on `[a, b]`,
/// in decreasing order, with barycentric weights `(-1)^k delta_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebyshevGrid {
    /// `m = 0` gives the single node `(a + b) / 2`.
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!("interval [{a}, {b}] must satisfy a < b")));
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        if m == 0 {
            return Ok(ChebyshevGrid {
                a,
                b,
                nodes: vec![mid],
                weights: vec![1.0],
            });
        }
        let mf = m as f64;
        let nodes = (0..=m)
            .map(|k| match k {
                0 => b,
                k if k == m => a,
                // sin form keeps the node set exactly symmetric.
                k => mid + half * (PI * (mf - 2.0 * k as f64) / (2.0 * mf)).sin(),
            })
            .collect();
        let weights = (0..=m)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                if k == 0 || k == m {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        Ok(ChebyshevGrid { a, b, nodes, weights })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A value and whether it came from outside `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub extrapolated: bool,
}

/// The interpolating polynomial of `values` on a [`ChebyshevGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    grid: ChebyshevGrid,
    values: Vec<f64>,
}

impl Interpolant {
    pub fn new(grid: ChebyshevGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes.len() {
            return Err(Error::invalid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.nodes.len()
            )));
        }
        Ok(Interpolant { grid, values })
    }

    pub fn from_fn(grid: ChebyshevGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&t| f(t)).collect();
        Interpolant { grid, values }
    }

    pub fn grid(&self) -> &ChebyshevGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Barycentric evaluation; returns the stored value at a node and NaN
    /// for NaN input.
    pub fn evaluate(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&x, &w), &v) in self.grid.nodes.iter().zip(&self.grid.weights).zip(&self.values) {
            let d = t - x;
            if d == 0.0 {
                return v;
            }
            let c = w / d;
            num += c * v;
            den += c;
        }
        num / den
    }

    /// As [`evaluate`](Self::evaluate), but rejects NaN and flags points
    /// outside the interval.
    pub fn evaluate_checked(&self, t: f64) -> Result<Evaluation> {
        if t.is_nan() {
            return Err(Error::invalid("cannot evaluate an interpolant at NaN"));
        }
        Ok(Evaluation {
            value: self.evaluate(t),
            extrapolated: t < self.grid.a || t > self.grid.b,
        })
    }
}

/// `4 ||g^(sigma+1)||_1 / (pi sigma (M - sigma)^sigma)`, the Chebyshev
/// interpolation error bound for a function with `sigma + 1` derivatives.
pub fn interp_error_bound(sigma: u32, m: u32, l1_norm: f64) -> Result<f64> {
    if sigma == 0 || m <= sigma {
        return Err(Error::invalid(format!("need M > sigma >= 1, got sigma = {sigma}, M = {m}")));
    }
    if !(l1_norm >= 0.0) {
        return Err(Error::invalid("norm must be nonnegative"));
    }
    let s = sigma as f64;
    Ok(4.0 * l1_norm / (PI * s * ((m - sigma) as f64).powi(sigma as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_examples() {
        let g = ChebyshevGrid::new(-1.0, 1.0, 2).unwrap();
        assert_eq!(g.nodes(), &[1.0, 0.0, -1.0]);
        let g = ChebyshevGrid::new(40.0, 100.0, 2).unwrap();
        assert_eq!(g.nodes(), &[100.0, 70.0, 40.0]);
        let g = ChebyshevGrid::new(0.0, 1.0, 1).unwrap();
        assert_eq!(g.nodes(), &[1.0, 0.0]);
        assert_eq!(g.weights(), &[0.5, -0.5]);
        let g = ChebyshevGrid::new(2.0, 4.0, 0).unwrap();
        assert_eq!(g.nodes(), &[3.0]);
        assert!(ChebyshevGrid::new(1.0, 1.0, 3).is_err());
        assert!(ChebyshevGrid::new(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn grid_is_cosine_family() {
        let g = ChebyshevGrid::new(-3.0, 7.0, 17).unwrap();
        for (k, &x) in g.nodes().iter().enumerate() {
            let want = 2.0 + 5.0 * (k as f64 * PI / 17.0).cos();
            assert!((x - want).abs() < 1e-14);
        }
        assert!(g.nodes().windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn evaluation_examples() {
        let g = ChebyshevGrid::new(-1.0, 1.0, 9).unwrap();
        let ones = Interpolant::new(g.clone(), vec![1.0; 10]).unwrap();
        for t in [-1.0, -0.77, 0.0, 0.31, 0.999] {
            assert!((ones.evaluate(t) - 1.0).abs() < 1e-15);
        }
        let ident = Interpolant::from_fn(g, |t| t);
        assert!((ident.evaluate(0.3) - 0.3).abs() < 1e-13);
        assert!(ident.evaluate(f64::NAN).is_nan());
        assert!(ident.evaluate_checked(f64::NAN).is_err());
        assert!(ident.evaluate_checked(1.01).unwrap().extrapolated);
        assert!(!ident.evaluate_checked(1.0).unwrap().extrapolated);
        assert!(Interpolant::new(ChebyshevGrid::new(0.0, 1.0, 3).unwrap(), vec![0.0; 3]).is_err());
    }

    #[test]
    fn runge_function() {
        let runge = |t: f64| 1.0 / (1.0 + t * t);
        let max_err = |m: usize| {
            let p = Interpolant::from_fn(ChebyshevGrid::new(-5.0, 5.0, m).unwrap(), runge);
            (0..1000)
                .map(|i| -5.0 + 10.0 * i as f64 / 999.0)
                .map(|t| (p.evaluate(t) - runge(t)).abs())
                .fold(0.0, f64::max)
        };
        // Geometric rate rho^-M with rho = 0.2 + sqrt(1.04).
        let e40 = max_err(40);
        assert!(e40 < 4e-4 && e40 > 1e-4, "{e40:e}");
        assert!(max_err(80) <= 1e-6);
    }

    #[test]
    fn error_bound_examples() {
        assert!((interp_error_bound(1, 11, PI).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(interp_error_bound(2, 12, 0.0).unwrap(), 0.0);
        let b = interp_error_bound(4, 42, 1.0).unwrap();
        assert!((b - 1.526_566_546_181_115_6e-7).abs() < 1e-20);
        assert!(interp_error_bound(3, 3, 1.0).is_err());
        assert!(interp_error_bound(0, 3, 1.0).is_err());
    }

    #[test]
    fn matches_lagrange_product_form() {
        let g = ChebyshevGrid::new(0.5, 2.0, 4).unwrap();
        let vals = vec![0.3, -1.2, 2.5, 0.7, 1.1];
        let p = Interpolant::new(g.clone(), vals.clone()).unwrap();
        for t in [0.6, 1.0, 1.37, 1.9] {
            let x = g.nodes();
            let lagrange: f64 = (0..5)
                .map(|m| {
                    let chi: f64 = (0..5).filter(|&k| k != m).map(|k| (t - x[k]) / (x[m] - x[k])).product();
                    vals[m] * chi
                })
                .sum();
            assert!((p.evaluate(t) - lagrange).abs() < 1e-13);
        }
    }

    #[test]
    fn exponential_convergence() {
        let errs: Vec<f64> = (4..=24)
            .map(|m| {
                let p = Interpolant::from_fn(ChebyshevGrid::new(0.0, 1.0, m).unwrap(), f64::exp);
                (0..1000)
                    .map(|i| i as f64 / 999.0)
                    .map(|t| (p.evaluate(t) - t.exp()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        // Increases at the rounding floor do not count.
        let floor = 8.0 * f64::EPSILON * std::f64::consts::E;
        let reversals = errs.windows(2).filter(|w| w[1] > w[0] + floor).count();
        assert!(reversals <= 1, "{errs:?}");
        assert!(errs[errs.len() - 1] < 1e-14);
    }

    fn horner(c: &[f64], t: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
    }

    proptest! {
        #[test]
        fn nodes_are_exact(m in 0usize..60, a in -50.0f64..50.0, w in 0.1f64..100.0, seed in any::<u64>()) {
            let g = ChebyshevGrid::new(a, a + w, m).unwrap();
            let vals: Vec<f64> = (0..=m).map(|k| ((k as u64 ^ seed) as f64).sin()).collect();
            let p = Interpolant::new(g.clone(), vals.clone()).unwrap();
            for (x, v) in g.nodes().iter().zip(&vals) {
                prop_assert_eq!(p.evaluate(*x).to_bits(), v.to_bits());
            }
        }

        #[test]
        fn reproduces_polynomials(m in 1usize..=50, coeffs in proptest::collection::vec(-1.0f64..1.0, 51), deg_frac in 0.0f64..=1.0) {
            let deg = ((m as f64) * deg_frac) as usize;
            let c = &coeffs[..=deg];
            let p = Interpolant::from_fn(ChebyshevGrid::new(-1.0, 1.0, m).unwrap(), |t| horner(c, t));
            let scale: f64 = c.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
            for i in 0..1000 {
                let t = -1.0 + 2.0 * i as f64 / 999.0;
                prop_assert!((p.evaluate(t) - horner(c, t)).abs() <= 1e-11 * scale);
            }
        }

        #[test]
        fn even_data_gives_even_interpolant(m in 1usize..40, h in 0.5f64..10.0, t in 0.0f64..1.0) {
            let p = Interpolant::from_fn(ChebyshevGrid::new(-h, h, m).unwrap(), |x| (x * x).cos() + x.powi(4));
            let s = t * h;
            prop_assert!((p.evaluate(s) - p.evaluate(-s)).abs() <= 1e-12 * (1.0 + p.evaluate(s).abs()));
        }
    }
}
