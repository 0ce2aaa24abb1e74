//! Numerical evaluation of the two-dimensional Euclidean Lévy constant
//! `L_{2,1}` through a reduced triple integral over a parametrized
//! transversal, with three independent checks: a Monte Carlo estimate from
//! the full density, a per-point quadrature over the fundamental domain,
//! and direct simulation of best approximations.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cubature;
pub mod diophantine;
pub mod error;
pub mod fundamental_domain;
pub mod geometry;
pub mod integrand;
pub mod montecarlo;
pub mod quadrature;

pub use diophantine::{best_approximations, levy_estimate, BestApproxRecord, Estimator, LevyConfig, LevyEstimate};
pub use error::{LevyError, Result};
pub use fundamental_domain::{build_f, lattice_membership_oracle, tiling_check, EdgeRow, RectilinearDomain};
pub use geometry::{classify_region, ParamPoint, RegionLabel};
pub use integrand::{inner_integrand, inner_oracle, XDenominator};
pub use montecarlo::{estimate_mu7, McEstimate};
pub use quadrature::{integrate_outer, levy_constant, QuadratureResult, ZetaConstants};
