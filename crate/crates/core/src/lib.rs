//! Information geometry of relative alpha-entropy on finite alphabets.
//!
//! Divergences and escorts live in [`measures`], parametric families and
//! priors in [`manifold`], metrics and connections in [`geometry`], and the
//! Bayesian alpha-Cramer-Rao pipeline in [`bounds`]. [`cli`] drives all of it
//! from JSON configs.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fuzz;
pub mod geometry;
pub mod linalg;
pub mod manifold;
pub mod measures;
pub mod quadrature;

pub use error::{Error, Result};
pub use manifold::{BayesianModel, ParamDomain, ParametricFamily, Prior, ThetaPoint};
pub use measures::{AlphaOrder, FinitePmf, PositiveMeasure};
