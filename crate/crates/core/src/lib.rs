//! Cdf and pdf estimation for `X = phi(Y)`, `Y` standard normal, by
//! preintegration with respect to one variable, randomly shifted rank-1
//! lattice rules and Chebyshev interpolation in the level `t`.
//!
//! The pieces, bottom up:
//!
//! - [`lattice`]: generating vectors, random shifts and lattice point sets.
//! - [`gaussian`]: standard normal pdf, cdf and quantile.
//! - [`model`]: the monotone models (linear Gaussian, sum of lognormals) and
//!   their one-dimensional fibers.
//! - [`preintegration`]: the safeguarded Newton root finder and the preintegrated
//!   cdf/pdf estimators, pointwise and batched over many levels.
//! - [`interp`]: Chebyshev grids and barycentric interpolation.
//! - [`harness`]: shift averaging, Monte Carlo and plain QMC baselines,
//!   RMISE, convergence and timing studies.

pub mod error;
pub mod gaussian;
pub mod harness;
pub mod interp;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod preintegration;

pub use error::{Error, Result};
pub use interp::{ChebyshevGrid, Interpolant};
pub use lattice::{draw_shifts, GeneratingVector, LatticeRule, NormalLattice, PointSet, Shift};
pub use linalg::Matrix;
pub use model::{
    AnyModel, CovarianceSpec, FactorMatrix, Fiber, LinearGaussian, LognormalSum, Model,
};
pub use preintegration::{find_xi, Executor, Kind, RootConfig, RootResult};
