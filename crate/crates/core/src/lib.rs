//! Tail and density asymptotics for random Dirichlet series
//! `S(α) = Σ_{k≥1} k^{-α} η_k` with bounded-above, zero-mean coefficients.
//!
//! The deterministic layers (distributions, series, constants, saddle point,
//! asymptotic formulas) are generic over [`Real`]; the `f64` aliases at the
//! crate root are what most callers want. Monte Carlo and the enumeration
//! oracle work in `f64` only.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod config;
pub mod constants;
pub mod distributions;
pub mod error;
pub mod logspace;
pub mod montecarlo;
pub mod oracle;
pub mod quadrature;
pub mod saddle;
pub mod scalar;
pub mod series;
pub mod special;
pub mod validate;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Distribution = distributions::DistributionSpec<f64>;
pub type Cgf = distributions::CgfEval<f64>;
pub type Constants = constants::AsymptoticConstants<f64>;
pub type Estimate = asymptotics::TailEstimate<f64>;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
