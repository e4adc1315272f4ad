use super::{Fiber, Model};
use crate::error::{Error, Result};
use crate::gaussian;

/// `phi(y0, y) = c0 y0 + c1 y1 + ... + cd yd + b`. The output is normal with
/// mean `b` and standard deviation `||c||_2`, which makes it an exact oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussian {
    coeffs: Vec<f64>,
    offset: f64,
}

impl LinearGaussian {
    /// `coeffs[0]` multiplies `y0` and must be positive.
    pub fn new(coeffs: Vec<f64>, offset: f64) -> Result<Self> {
        match coeffs.first() {
            Some(&c0) if c0 > 0.0 => {}
            Some(&c0) => {
                return Err(Error::NotMonotone(format!(
                    "coefficient of y0 must be positive, got {c0}"
                )))
            }
            None => return Err(Error::invalid("linear model needs at least one coefficient")),
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !offset.is_finite() {
            return Err(Error::invalid("linear model coefficients must be finite"));
        }
        Ok(LinearGaussian { coeffs, offset })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn exact_cdf(&self, t: f64) -> f64 {
        gaussian::cdf((t - self.offset) / self.scale())
    }

    pub fn exact_pdf(&self, t: f64) -> f64 {
        let s = self.scale();
        gaussian::pdf((t - self.offset) / s) / s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFiber {
    slope: f64,
    intercept: f64,
}

impl Fiber for LinearFiber {
    #[inline]
    fn eval(&self, y0: f64) -> f64 {
        self.slope * y0 + self.intercept
    }

    #[inline]
    fn deriv(&self, _y0: f64) -> f64 {
        self.slope
    }

    fn lower_limit(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

impl Model for LinearGaussian {
    type Fiber = LinearFiber;

    fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn eval(&self, y0: f64, y: &[f64]) -> f64 {
        self.fiber(y).eval(y0)
    }

    fn deriv0(&self, _y0: f64, _y: &[f64]) -> f64 {
        self.coeffs[0]
    }

    fn fiber(&self, y: &[f64]) -> LinearFiber {
        let rest: f64 = self.coeffs[1..].iter().zip(y).map(|(c, v)| c * v).sum();
        LinearFiber {
            slope: self.coeffs[0],
            intercept: rest + self.offset,
        }
    }

    fn global_infimum(&self) -> f64 {
        f64::NEG_INFINITY
    }
}
