//! Moment explosion, log-MGF asymptotics and tail expansions for one-dimensional
//! square-root type SDEs.
//!
//! The crate is organised bottom-up:
//!
//! * [`models`]: CIR reference process (critical moment, log-MGF, exact law),
//!   SDE specifications, the Σ-transform and the drift validator.
//! * [`legendre`]: Fenchel–Legendre conjugate of a log-MGF and its envelope checks.
//! * [`tauberian`]: Laplace-type integral asymptotics, CCDF expansions and tilt ratios.
//! * [`fixedpoint`]: Picard solver for the log-MGF remainder with nonlinear drift.
//! * [`cev`]: explicit log-MGF series and tail for the mean-reverting CEV process.
//! * [`montecarlo`]: path simulation and empirical estimators used as oracles.
//! * [`cli`]: the command-line front end.

pub mod acceptance;
pub mod cev;
pub mod cli;
pub mod error;
pub mod fixedpoint;
pub mod legendre;
pub mod models;
pub mod montecarlo;
pub mod quad;
pub mod special;
pub mod tauberian;

pub use error::{Error, Result};
