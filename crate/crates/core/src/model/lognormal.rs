use std::cell::Cell;

use super::{check_monotone, FactorMatrix, Fiber, Model};
use crate::error::{Error, Result};

/// Sum of correlated lognormals, `phi(Y) = sum_i exp(A_i . Y)` with `Y`
/// standard normal in `R^(d+1)` and `Y_0 = y0`.
#[derive(Debug, Clone)]
pub struct LognormalSum {
    factor: FactorMatrix,
    lead: Vec<f64>,
}

impl LognormalSum {
    /// Requires column 0 of `a` to be nonnegative with at least one positive
    /// entry, which makes `phi` strictly increasing in `y0`.
    pub fn new(a: FactorMatrix) -> Result<Self> {
        let check = check_monotone(&a);
        if !check.monotone {
            return Err(Error::NotMonotone(check.message));
        }
        let lead = a.matrix().column(0);
        Ok(LognormalSum { factor: a, lead })
    }

    pub fn factor(&self) -> &FactorMatrix {
        &self.factor
    }

    #[inline]
    fn rest(&self, i: usize, y: &[f64]) -> f64 {
        self.factor.matrix().row(i)[1..]
            .iter()
            .zip(y)
            .map(|(a, v)| a * v)
            .sum()
    }
}

/// Fiber of [`LognormalSum`]: the terms with a positive `y0` coefficient as
/// `(a_i0, s_i)` pairs, plus the constant contributed by the others.
#[derive(Debug, Clone)]
pub struct LognormalFiber {
    terms: Vec<(f64, f64)>,
    constant: f64,
    exp_calls: Cell<u64>,
}

impl LognormalFiber {
    /// Exponentials evaluated through this fiber so far.
    pub fn exp_evaluations(&self) -> u64 {
        self.exp_calls.get()
    }

    pub fn active_terms(&self) -> usize {
        self.terms.len()
    }

    #[inline]
    fn count(&self) {
        self.exp_calls.set(self.exp_calls.get() + self.terms.len() as u64);
    }
}

impl Fiber for LognormalFiber {
    #[inline]
    fn eval(&self, y0: f64) -> f64 {
        self.count();
        self.terms.iter().map(|&(a, s)| (a * y0 + s).exp()).sum::<f64>() + self.constant
    }

    #[inline]
    fn deriv(&self, y0: f64) -> f64 {
        self.count();
        self.terms.iter().map(|&(a, s)| a * (a * y0 + s).exp()).sum()
    }

    #[inline]
    fn eval_deriv(&self, y0: f64) -> (f64, f64) {
        self.count();
        let mut value = self.constant;
        let mut slope = 0.0;
        for &(a, s) in &self.terms {
            let e = (a * y0 + s).exp();
            value += e;
            slope += a * e;
        }
        (value, slope)
    }

    fn lower_limit(&self) -> f64 {
        self.constant
    }
}

impl Model for LognormalSum {
    type Fiber = LognormalFiber;

    fn dim(&self) -> usize {
        self.factor.matrix().cols() - 1
    }

    fn eval(&self, y0: f64, y: &[f64]) -> f64 {
        (0..self.lead.len())
            .map(|i| (self.lead[i] * y0 + self.rest(i, y)).exp())
            .sum()
    }

    fn deriv0(&self, y0: f64, y: &[f64]) -> f64 {
        (0..self.lead.len())
            .map(|i| self.lead[i] * (self.lead[i] * y0 + self.rest(i, y)).exp())
            .sum()
    }

    fn fiber(&self, y: &[f64]) -> LognormalFiber {
        let mut terms = Vec::with_capacity(self.lead.len());
        let mut constant = 0.0;
        for (i, &a) in self.lead.iter().enumerate() {
            let s = self.rest(i, y);
            if a > 0.0 {
                terms.push((a, s));
            } else {
                constant += s.exp();
            }
        }
        LognormalFiber {
            terms,
            constant,
            exp_calls: Cell::new(0),
        }
    }

    fn global_infimum(&self) -> f64 {
        0.0
    }
}
