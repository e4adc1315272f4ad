//! Models `X = phi(y0, y)` that are strictly increasing in the distinguished
//! variable `y0`, and their univariate fibers `phi(., y)`.

mod covariance;
mod linear;
mod lognormal;

pub use covariance::{check_monotone, pca_factorize, CovarianceSpec, FactorMatrix, MonotoneCheck};
pub use linear::{LinearFiber, LinearGaussian};
pub use lognormal::{LognormalFiber, LognormalSum};

/// The restriction `y0 -> phi(y0, y)` for a fixed `y`, with whatever depends
/// on `y` already folded in. Evaluation cost does not depend on `d`.
pub trait Fiber {
    fn eval(&self, y0: f64) -> f64;

    /// `D^0 phi(y0, y)`.
    fn deriv(&self, y0: f64) -> f64;

    fn eval_deriv(&self, y0: f64) -> (f64, f64) {
        (self.eval(y0), self.deriv(y0))
    }

    /// Infimum of the fiber over `y0` (may be `-inf`).
    fn lower_limit(&self) -> f64;
}

/// A transformation of `d + 1` independent standard normal inputs with
/// `D^0 phi > 0` everywhere and `phi -> inf` as `y0 -> inf`.
pub trait Model: Sync {
    type Fiber: Fiber;

    /// Number of inputs besides `y0`.
    fn dim(&self) -> usize;

    fn eval(&self, y0: f64, y: &[f64]) -> f64;

    fn deriv0(&self, y0: f64, y: &[f64]) -> f64;

    fn fiber(&self, y: &[f64]) -> Self::Fiber;

    /// Infimum of `phi` over all inputs.
    fn global_infimum(&self) -> f64;
}

/// Either of the built-in models, for callers that pick one at run time.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Linear(LinearGaussian),
    Lognormal(LognormalSum),
}

#[derive(Debug, Clone)]
pub enum AnyFiber {
    Linear(LinearFiber),
    Lognormal(LognormalFiber),
}

impl Fiber for AnyFiber {
    #[inline]
    fn eval(&self, y0: f64) -> f64 {
        match self {
            AnyFiber::Linear(f) => f.eval(y0),
            AnyFiber::Lognormal(f) => f.eval(y0),
        }
    }

    #[inline]
    fn deriv(&self, y0: f64) -> f64 {
        match self {
            AnyFiber::Linear(f) => f.deriv(y0),
            AnyFiber::Lognormal(f) => f.deriv(y0),
        }
    }

    #[inline]
    fn eval_deriv(&self, y0: f64) -> (f64, f64) {
        match self {
            AnyFiber::Linear(f) => f.eval_deriv(y0),
            AnyFiber::Lognormal(f) => f.eval_deriv(y0),
        }
    }

    fn lower_limit(&self) -> f64 {
        match self {
            AnyFiber::Linear(f) => f.lower_limit(),
            AnyFiber::Lognormal(f) => f.lower_limit(),
        }
    }
}

impl Model for AnyModel {
    type Fiber = AnyFiber;

    fn dim(&self) -> usize {
        match self {
            AnyModel::Linear(m) => m.dim(),
            AnyModel::Lognormal(m) => m.dim(),
        }
    }

    fn eval(&self, y0: f64, y: &[f64]) -> f64 {
        match self {
            AnyModel::Linear(m) => m.eval(y0, y),
            AnyModel::Lognormal(m) => m.eval(y0, y),
        }
    }

    fn deriv0(&self, y0: f64, y: &[f64]) -> f64 {
        match self {
            AnyModel::Linear(m) => m.deriv0(y0, y),
            AnyModel::Lognormal(m) => m.deriv0(y0, y),
        }
    }

    fn fiber(&self, y: &[f64]) -> AnyFiber {
        match self {
            AnyModel::Linear(m) => AnyFiber::Linear(m.fiber(y)),
            AnyModel::Lognormal(m) => AnyFiber::Lognormal(m.fiber(y)),
        }
    }

    fn global_infimum(&self) -> f64 {
        match self {
            AnyModel::Linear(m) => m.global_infimum(),
            AnyModel::Lognormal(m) => m.global_infimum(),
        }
    }
}

impl From<LinearGaussian> for AnyModel {
    fn from(m: LinearGaussian) -> Self {
        AnyModel::Linear(m)
    }
}

impl From<LognormalSum> for AnyModel {
    fn from(m: LognormalSum) -> Self {
        AnyModel::Lognormal(m)
    }
}

/// A fiber given by closures, handy for exercising the root finder.
pub struct FnFiber<F, G> {
    pub f: F,
    pub df: G,
    pub lower: f64,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> Fiber for FnFiber<F, G> {
    fn eval(&self, y0: f64) -> f64 {
        (self.f)(y0)
    }

    fn deriv(&self, y0: f64) -> f64 {
        (self.df)(y0)
    }

    fn lower_limit(&self) -> f64 {
        self.lower
    }
}
