//! Barrier functions built from exterior balls, and the regularity report.
//!
//! For an exterior ball `B_s(u)` touching the closure of the domain only at
//! `v`, the function
//!
//! * `log(|x - u| / s)` in the plane,
//! * `s^{2-d} - |x - u|^{2-d}` for `d >= 3`,
//! * `|x - u| - s` on the line (a linear analogue, added for completeness),
//!
//! is harmonic away from `u`, vanishes at `v` and is positive on the rest of
//! the closure: a barrier at `v`, which makes `v` a regular boundary point.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, Domain, ExteriorBall, Point, BOUNDARY_TOL};
use crate::oracle::quadrature::sphere_average;
use crate::sampling::derive_stream;

/// Tolerances of the barrier certificate.
pub const ZERO_TOL: f64 = 1e-12;
pub const HARMONIC_TOL: f64 = 1e-6;
const EXCLUSION_RADIUS: f64 = 1e-6;
const MEAN_VALUE_POINTS: usize = 10;
const MIN_POLE_DISTANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSpec {
    pub v: Point,
    pub u: Point,
    pub s: f64,
}

impl BarrierSpec {
    pub fn new(v: Point, u: Point, s: f64) -> Result<Self> {
        if v.dim() != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: v.dim(),
                got: u.dim(),
            });
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(invalid("s", "exterior ball radius must be positive"));
        }
        Ok(BarrierSpec { v, u, s })
    }

    pub fn from_exterior_ball(v: Point, ball: &ExteriorBall) -> Result<Self> {
        BarrierSpec::new(v, ball.center.clone(), ball.radius)
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }
}

/// The barrier `q_v(x)`.
pub fn barrier_value(spec: &BarrierSpec, x: &Point) -> Result<f64> {
    if x.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: x.dim(),
        });
    }
    let r = dist(x, &spec.u);
    if r == 0.0 {
        return Err(invalid("x", "the barrier is singular at the exterior ball center"));
    }
    Ok(barrier_raw(spec.dim(), spec.s, r))
}

fn barrier_raw(d: usize, s: f64, r: f64) -> f64 {
    match d {
        1 => r - s,
        2 => (r / s).ln(),
        _ => {
            let p = 2.0 - d as f64;
            s.powf(p) - r.powf(p)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    /// `|q_v(v)|`.
    pub value_at_v: f64,
    pub zero_ok: bool,
    /// Smallest barrier value over the sampled closure points.
    pub min_sampled_value: f64,
    pub samples_checked: usize,
    pub positive_ok: bool,
    /// Largest `|q(x) - mean of q over a sphere about x|` at the probe points.
    pub mean_value_residual: f64,
    pub harmonic_ok: bool,
}

impl BarrierReport {
    pub fn pass(&self) -> bool {
        self.zero_ok && self.positive_ok && self.harmonic_ok
    }
}

/// Checks that `spec` is a barrier for `domain` at `spec.v`: it vanishes at
/// `v`, is positive at `n_samples` sampled points of the closure away from
/// `v`, and has the mean value property at interior probe points.
pub fn verify_barrier(domain: &Domain, spec: &BarrierSpec, n_samples: usize, seed: u64) -> Result<BarrierReport> {
    domain.check_dim(spec.dim())?;
    domain.require_boundary(&spec.v)?;
    if (dist(&spec.v, &spec.u) - spec.s).abs() > BOUNDARY_TOL {
        return Err(invalid("u", "exterior ball does not touch the boundary point v"));
    }

    let value_at_v = barrier_value(spec, &spec.v)?.abs();

    let mut rng = derive_stream(seed, 0);
    let mut min_val = f64::INFINITY;
    let mut checked = 0;
    while checked < n_samples {
        let x = domain.sample_interior(&mut rng);
        // alternate interior points and their nearest boundary points
        let q = if checked % 2 == 0 { x } else { domain.project_to_boundary(&x)? };
        if q.distance(&spec.v) <= EXCLUSION_RADIUS {
            continue;
        }
        let r = dist(&q, &spec.u);
        let val = if r == 0.0 { f64::NEG_INFINITY } else { barrier_raw(spec.dim(), spec.s, r) };
        min_val = min_val.min(val);
        checked += 1;
    }

    let mut rng = derive_stream(seed, 1);
    let mut residual: f64 = 0.0;
    let mut probes = 0;
    let mut attempts = 0;
    while probes < MEAN_VALUE_POINTS && attempts < 100_000 {
        attempts += 1;
        let x = domain.sample_interior(&mut rng);
        let to_pole = dist(&x, &spec.u);
        if to_pole < MIN_POLE_DISTANCE {
            continue;
        }
        let rho = 0.5 * domain.distance_raw(&x).min(to_pole);
        let center = barrier_raw(spec.dim(), spec.s, to_pole);
        let avg = sphere_average(&x, rho, |y| barrier_raw(spec.dim(), spec.s, dist(y, &spec.u)))?;
        residual = residual.max((avg - center).abs());
        probes += 1;
    }
    if probes == 0 {
        residual = f64::INFINITY;
    }

    Ok(BarrierReport {
        value_at_v,
        zero_ok: value_at_v <= ZERO_TOL,
        min_sampled_value: min_val,
        samples_checked: checked,
        positive_ok: min_val > 0.0,
        mean_value_residual: residual,
        harmonic_ok: residual <= HARMONIC_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityStatus {
    /// An exterior ball exists and its barrier passed verification.
    RegularPoincare,
    /// No certificate found. Never read as "irregular".
    Unknown,
}

impl fmt::Display for RegularityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularityStatus::RegularPoincare => write!(f, "regular (Poincaré)"),
            RegularityStatus::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityEntry {
    pub point: Point,
    pub status: RegularityStatus,
    pub exterior_ball: Option<ExteriorBall>,
    pub barrier: Option<BarrierReport>,
}

/// Samples used when certifying each barrier in a regularity report.
pub const REPORT_BARRIER_SAMPLES: usize = 10_000;

/// Classifies boundary points by the exterior-ball criterion.
pub fn regularity_report(domain: &Domain, boundary_points: &[Point], seed: u64) -> Result<Vec<RegularityEntry>> {
    boundary_points
        .iter()
        .map(|v| {
            let ball = domain.exterior_ball(v)?;
            let Some(ball) = ball else {
                return Ok(RegularityEntry {
                    point: v.clone(),
                    status: RegularityStatus::Unknown,
                    exterior_ball: None,
                    barrier: None,
                });
            };
            let spec = BarrierSpec::from_exterior_ball(v.clone(), &ball)?;
            let report = verify_barrier(domain, &spec, REPORT_BARRIER_SAMPLES, seed)?;
            let status = if report.pass() {
                RegularityStatus::RegularPoincare
            } else {
                RegularityStatus::Unknown
            };
            Ok(RegularityEntry {
                point: v.clone(),
                status,
                exterior_ball: Some(ball),
                barrier: Some(report),
            })
        })
        .collect()
}
