//! Monte Carlo solver for the Dirichlet problem for Laplace's equation on
//! bounded open domains of R^d.
//!
//! The solution at an interior point `v` is estimated as `E[f(X(∞))]`, where
//! `X` is a contraction random walk that moves a fixed fraction `r` of the
//! distance to the boundary in a uniform random direction at every step.
//! Alongside the estimator the crate ships verification machinery: analytic
//! harmonic extensions, barrier certificates for boundary regularity, and a
//! finite-difference reference solver.

pub mod cli;
pub mod config;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod oracle;
pub mod sampling;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use estimator::{
    check_against_reference, check_coordinate_martingale, check_mean_value, check_r_independence, estimate_grid, estimate_point,
    CheckSettings, ConsistencyReport, Estimate, GridEntry, PointStatus,
};
pub use geometry::{Domain, ExteriorBall, Patch, Point};
pub use oracle::{BoundaryFunction, HarmonicPoly};
pub use sampling::{derive_stream, sample_unit_sphere, RngStream};
pub use walk::{run_walk, walk_step, WalkParams, WalkResult};
