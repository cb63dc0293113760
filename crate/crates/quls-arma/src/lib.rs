//! Quantile unit-log-symmetric ARMA (QULS-ARMA) models for time series that
//! live on the open unit interval.
//!
//! The crate provides:
//!
//! - symmetric base kernels (normal, Student-t) with density, derivatives,
//!   CDF and quantile function ([`kernel`]);
//! - strictly increasing links between `(0,1)` and the real line ([`link`]);
//! - the static unit-log-symmetric distribution in its location and quantile
//!   parameterizations, with sampling ([`uls`]);
//! - the QULS-ARMA conditional-quantile recursion, conditional log-likelihood,
//!   analytic score and Hessian ([`model`]);
//! - conditional maximum-likelihood fitting with quasi-Newton optimization,
//!   observed-information standard errors and information criteria
//!   ([`estimate`]);
//! - a data generator and Monte Carlo harness for bias/RMSE studies
//!   ([`simulate`]);
//! - multi-step quantile forecasting ([`forecast`]) and residual diagnostics
//!   ([`diagnostics`]).
//!
//! A bundled monthly hydroelectric-storage dataset is available through
//! [`dataset::stored_energy`] for examples and end-to-end tests.

pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod estimate;
pub mod forecast;
pub mod kernel;
pub mod link;
pub mod model;
pub mod optim;
pub mod simulate;
pub mod uls;

mod math;
mod sampling;

pub use error::{Error, Result};
pub use kernel::SymmetricKernel;
pub use link::LinkFunction;
pub use model::{BoundedSeries, ModelSpec, ParamVector, RecursionState};
