//! Monte Carlo / quasi-Monte Carlo estimation of option Greeks for
//! arithmetic Asian, binary Asian and lookback options.
//!
//! The estimators are conditionally smoothed pathwise (CPW) formulas: the
//! payoff is integrated analytically over the first normal coordinate,
//! which removes discontinuities before differentiation, with a
//! likelihood-ratio (LR) baseline for variance comparisons. Simulation
//! methods layer plain Monte Carlo, antithetic variates, scrambled Sobol'
//! sequences, and Brownian bridge increment construction on top of exact
//! lognormal path transitions.
//!
//! Crate layout:
//!
//! * [`rng`] — reproducible pseudo and Sobol' variate streams.
//! * [`bridge`] — left-to-right and Brownian bridge increment builders.
//! * [`products`] — product definitions, path simulation, per-path
//!   CPW and LR Greek estimators.
//! * [`engine`] — runs methods over P paths × L runs with deterministic
//!   parallelism.
//! * [`stats`] — run aggregation, error bars, variance reduction factors.
//! * [`cli`] — the configuration-driven experiment front end.

pub mod bridge;
pub mod cli;
pub mod engine;
pub mod error;
pub mod normal;
pub mod products;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
