//! Ground truth used to validate the estimator: boundary data, closed-form
//! harmonic extensions, barrier certificates, sphere quadrature and a
//! finite-difference solver.

pub mod analytic;
pub mod barrier;
pub mod boundary;
pub mod fd;
pub mod quadrature;

pub use analytic::analytic_solution;
pub use barrier::{
    barrier_value, regularity_report, verify_barrier, BarrierReport, BarrierSpec, RegularityEntry,
    RegularityStatus,
};
pub use boundary::{BoundaryFunction, HarmonicPoly};
pub use fd::{fd_solve, FdGrid};
