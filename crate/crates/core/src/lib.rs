//! Numerical engine for 1D random dynamical systems with additive noise.
//!
//! The state space is the unit interval. A system is a Borel map `T` composed
//! with i.i.d. additive noise drawn from a bounded-variation kernel; boundary
//! effects are handled either by reflection or by wrapping onto the circle.
//! The engine discretizes the annealed transfer operator of such a system on a
//! uniform grid, solves for its stationary density, estimates mixing rates,
//! computes the linear response of the stationary density to perturbations of
//! the map, of the noise radius, and of random mixtures, and solves the
//! inverse control problem of recovering the map perturbation that produces a
//! prescribed response.
//!
//! Layout:
//! - [`measures`]: piecewise-constant densities, signed measures with atoms,
//!   and the three norms (L¹, variation, Wasserstein).
//! - [`dynamics`]: map models, perturbation families `D = 1 + δS`, and noise
//!   kernels with their derivative kernels.
//! - [`operator`]: Ulam discretization of the deterministic pushforward, the
//!   exact boundary-folding convolution operator, and their composition.
//! - [`response`]: stationary densities, mixing-contraction estimates, the
//!   resolvent on zero-average measures, and the response pipeline.
//! - [`validate`]: finite-difference and Monte Carlo cross-checks.
//! - [`control`]: regularized deconvolution and the linear-request solver.
//! - [`config`], [`runner`], [`io`]: the batch experiment driver behind the
//!   `noisy-response` CLI.

pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod measures;
pub mod operator;
pub mod response;
pub mod runner;
pub mod system;
pub mod validate;

pub use error::EngineError;
pub use measures::{Grid, GridDensity, NormKind, SignedMeasure};
pub use system::System;
