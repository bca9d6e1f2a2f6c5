//! Trimmed clustering under Bregman divergences.
//!
//! The crate is `no_std` (with `alloc`) and covers the algorithmic side of the
//! toolkit:
//!
//! - [`divergence`]: Bregman divergence families (squared Euclidean, scaled
//!   Gaussian, Mahalanobis, Poisson, Binomial, Gamma, exponential loss,
//!   logistic loss, simplex Kullback-Leibler, and per-coordinate hybrids).
//! - [`trimmed`]: the trimmed Lloyd iteration (keep the `q` points closest to
//!   the codebook, assign them to Bregman-Voronoi cells, move every center to
//!   the mean of its cell) and its multi-restart driver.
//! - [`selection`]: cost curves `q -> cost_k[q]` and an automated cut-point
//!   heuristic for choosing `(k, q)`.
//! - [`metrics`]: normalized mutual information with noise as label `0`.
//! - [`datagen`]: seeded exponential-family and Cauchy mixtures with uniform
//!   outliers.
//!
//! Enable the `parallel` feature to run restarts and grid cells on rayon;
//! results are identical to the sequential build.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x >= 0.0)` and friends are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod data;
pub mod datagen;
pub mod divergence;
mod error;
mod math;
pub mod metrics;
pub mod seed;
pub mod selection;
pub mod trimmed;
#[cfg(feature = "testkit")]
pub mod testkit;

pub use data::{Codebook, Dataset};
pub use divergence::{Divergence, DomainDescriptor, Interval, ScalarFamily};
pub use error::{Error, Result};
pub use trimmed::{TrimConfig, TrimmedFit};
