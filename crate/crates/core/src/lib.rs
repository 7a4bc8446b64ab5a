//! Differential privacy toolkit: histogram datasets, the Laplace and
//! report-noisy-max mechanisms, the ε-hockey-stick divergence and the
//! composition calculus, with numerical checkers for each guarantee.
//!
//! Everything that claims a privacy property has a matching checker:
//! exact probability arithmetic for finite output spaces, adaptive
//! quadrature for Laplace densities, and Monte Carlo estimators (with
//! Clopper–Pearson bounds) for sampler-only mechanisms.

pub mod cli;
pub mod dataset;
pub mod divergence;
pub mod error;
pub mod laplace;
pub mod mechanisms;
pub mod quadrature;
pub mod rng;
pub mod rnm;

pub use dataset::{CountingQuerySet, Dataset};
pub use divergence::{DiscreteDistribution, DiscreteKernel, DivergenceMethod, DivergenceResult};
pub use error::{DpError, Result};
pub use laplace::Laplace;
pub use mechanisms::{Mechanism, PrivacyBudget};
pub use rng::RandomSource;
pub use rnm::ExtendedReal;
