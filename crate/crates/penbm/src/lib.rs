//! Simulation and verification toolkit for supremum-penalized Brownian motion.
//!
//! The crate provides four layers:
//!
//! * [`path`] — grid-discretized paths with the deterministic transforms
//!   (time reversal, initial straightening, Pitman's `2S - X`, scaling) and
//!   the functionals built on them;
//! * [`samplers`] — exact (up to grid resolution) samplers for Brownian
//!   motion, bridges, Bessel(3) processes and bridges, meanders, ascents,
//!   first-passage fragments and the penalized-measure path decomposition;
//! * [`partition`] and [`gibbs`] — the phase diagram of the `(nu, h)`
//!   parameter plane, partition-function quadrature and asymptotics, and
//!   self-normalized importance-sampling estimators for the Gibbs measures;
//! * [`stats`] and [`experiments`] — weighted Kolmogorov-Smirnov and z
//!   machinery plus the registry of verification experiments driven by the
//!   `penbm` CLI.
//!
//! Everything is deterministic given an [`rng::RngStream`]: batch drivers
//! split work by stream id, so results are bit-identical for any worker
//! count.

pub mod config;
pub mod densities;
pub mod experiments;
pub mod gibbs;
pub mod parallel;
pub mod partition;
pub mod path;
pub mod quad;
pub mod rng;
pub mod samplers;
pub mod special;
pub mod stats;

pub use path::Path;
pub use rng::RngStream;
