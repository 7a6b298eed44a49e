//! Core library of the `optbench` option-pricing benchmark.
//!
//! Everything here is pure computation over in-memory data: closed-form
//! Black-Scholes / Black-Scholes-Merton pricing, GARCH(1,1) volatility
//! estimation, a seeded synthetic option-market generator, design-matrix
//! assembly with sliding-window lag features, from-scratch tree-ensemble
//! regressors (CART, random forest, first- and second-order gradient
//! boosting, Gaussian natural-gradient boosting), and the score-rate /
//! weighted evaluation mechanism used to rank models.
//!
//! The crate is `no_std`-compatible (with `alloc`); file formats, CSV
//! ingestion, and the experiment CLI live in the companion `optbench-cli`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dataset;
pub mod evaluation;
pub mod features;
pub(crate) mod math;
pub mod matrix;
pub mod models;
pub mod pricing;
pub mod volatility;

pub use math::mix_seed;
pub use matrix::DenseMatrix;
