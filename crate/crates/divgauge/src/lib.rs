//! divgauge: tightened variational representations of f-divergences.
//!
//! The crate implements the Legendre-transform, Donsker-Varadhan, and
//! transformation-improved (shift / scale / affine / power) objective
//! functionals for KL, alpha, Hellinger, chi-squared, and Renyi divergences,
//! together with the machinery to train neural or submanifold test functions
//! on them and to diagnose tightness via functional curvature and asymptotic
//! variance.

pub mod analysis;
pub mod cli;
pub mod data;
pub mod divergence;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod models;
pub mod objectives;
pub(crate) mod opt;
pub mod quad;
pub mod rng;
pub mod train;

pub use error::{DivError, Result};
