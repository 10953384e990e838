//! The contraction random walk and its termination at the boundary.
//!
//! Starting from `X(1) = v`, each step moves to
//! `X(n+1) = X(n) + r * d(X(n), ∂V) * θ_n` with `θ_n` uniform on the unit
//! sphere and `0 < r < 1`. The walk only converges to the boundary in the
//! limit, so it is stopped once the gap `d(X(n), ∂V)` falls to `epsilon` and
//! the last iterate is projected onto the nearest boundary point.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::geometry::{Domain, Point};
use crate::sampling::fill_unit_sphere;

pub const DEFAULT_R: f64 = 0.5;
pub const DEFAULT_MAX_STEPS: u64 = 100_000;
/// Default stopping shell as a fraction of the domain diameter.
pub const AUTO_EPSILON_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    r: f64,
    epsilon: f64,
    max_steps: u64,
}

impl WalkParams {
    pub fn new(r: f64, epsilon: f64, max_steps: u64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid("r", format!("must lie in the open interval (0,1), got {r}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid("epsilon", format!("must be a finite positive number, got {epsilon}")));
        }
        if max_steps == 0 {
            return Err(invalid("max_steps", "must be at least 1"));
        }
        Ok(WalkParams {
            r,
            epsilon,
            max_steps,
        })
    }

    /// Default parameters for `domain`: `r = 0.5`, `epsilon = 1e-4 * diameter`,
    /// `max_steps = 1e5`.
    pub fn for_domain(domain: &Domain) -> Self {
        WalkParams {
            r: DEFAULT_R,
            epsilon: auto_epsilon(domain),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    pub fn with_r(self, r: f64) -> Result<Self> {
        WalkParams::new(r, self.epsilon, self.max_steps)
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        WalkParams::new(self.r, epsilon, self.max_steps)
    }

    /// Checks the parameters against a domain (`epsilon < diameter`).
    pub fn validate_for(&self, domain: &Domain) -> Result<()> {
        if self.epsilon >= domain.diameter() {
            return Err(invalid(
                "epsilon",
                format!(
                    "must be smaller than the domain diameter {}, got {}",
                    domain.diameter(),
                    self.epsilon
                ),
            ));
        }
        Ok(())
    }
}

pub fn auto_epsilon(domain: &Domain) -> f64 {
    AUTO_EPSILON_FRACTION * domain.diameter()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkResult {
    /// Nearest boundary point to the final iterate.
    pub exit_point: Point,
    /// Number of steps taken.
    pub steps: u64,
    /// The step cap was hit before reaching the stopping shell.
    pub truncated: bool,
    /// Distance to the boundary of the final iterate, before projection.
    pub final_gap: f64,
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("r", format!("must lie in the open interval (0,1), got {r}")));
    }
    Ok(())
}

/// Moves `x` in place by `r * gap` along the unit vector `theta`.
///
/// If rounding would put the new iterate outside the open domain the step is
/// halved until it stays inside; in exact arithmetic this never triggers.
fn advance(domain: &Domain, x: &mut [f64], gap: f64, r: f64, theta: &[f64], scratch: &mut [f64]) {
    let mut len = r * gap;
    for _ in 0..64 {
        for ((s, xi), t) in scratch.iter_mut().zip(x.iter()).zip(theta) {
            *s = xi + len * t;
        }
        if domain.contains_raw(scratch) {
            x.copy_from_slice(scratch);
            return;
        }
        len *= 0.5;
    }
}

/// One step of the walk from `x` along a given unit direction `theta`.
pub fn step_along(x: &Point, domain: &Domain, r: f64, theta: &Point) -> Result<Point> {
    check_r(r)?;
    domain.require_interior(x)?;
    domain.check_dim(theta.dim())?;
    if (theta.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid("theta", "direction must be a unit vector"));
    }
    let gap = domain.distance_raw(x);
    let mut next = x.to_vec();
    let mut scratch = vec![0.0; x.dim()];
    advance(domain, &mut next, gap, r, theta, &mut scratch);
    Ok(Point::from_vec(next))
}

/// One step of the walk with a fresh uniform direction drawn from `stream`.
pub fn walk_step<R: Rng + ?Sized>(x: &Point, domain: &Domain, r: f64, stream: &mut R) -> Result<Point> {
    check_r(r)?;
    domain.require_interior(x)?;
    let mut theta = vec![0.0; x.dim()];
    fill_unit_sphere(stream, &mut theta);
    step_along(x, domain, r, &Point::from_vec(theta))
}

/// Runs a walk from `v` until it enters the stopping shell or hits the step cap.
pub fn run_walk<R: Rng + ?Sized>(
    v: &Point,
    domain: &Domain,
    params: &WalkParams,
    stream: &mut R,
) -> Result<WalkResult> {
    run_walk_traced(v, domain, params, stream, |_, _| {})
}

/// Like [`run_walk`], calling `observe(iterate, gap)` for every iterate
/// including the starting point.
pub fn run_walk_traced<R, F>(
    v: &Point,
    domain: &Domain,
    params: &WalkParams,
    stream: &mut R,
    observe: F,
) -> Result<WalkResult>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64], f64),
{
    domain.require_interior(v)?;
    let (exit, steps, truncated, final_gap) = walk_raw(domain, v, params, stream, observe);
    Ok(WalkResult {
        exit_point: Point::from_vec(exit),
        steps,
        truncated,
        final_gap,
    })
}

/// Unchecked walk kernel; `v` must be interior.
pub(crate) fn walk_raw<R, F>(
    domain: &Domain,
    v: &[f64],
    params: &WalkParams,
    rng: &mut R,
    mut observe: F,
) -> (Vec<f64>, u64, bool, f64)
where
    R: Rng + ?Sized,
    F: FnMut(&[f64], f64),
{
    let d = v.len();
    let mut x = v.to_vec();
    let mut theta = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    let mut gap = domain.distance_raw(&x);
    observe(&x, gap);
    let mut steps = 0u64;
    while gap > params.epsilon && steps < params.max_steps {
        fill_unit_sphere(rng, &mut theta);
        advance(domain, &mut x, gap, params.r, &theta, &mut scratch);
        steps += 1;
        gap = domain.distance_raw(&x);
        observe(&x, gap);
    }
    let truncated = gap > params.epsilon;
    let mut exit = vec![0.0; d];
    domain.nearest_boundary_raw(&x, &mut exit);
    (exit, steps, truncated, gap)
}

/// The iterate `X(m)` of the walk started at `X(1) = v`, i.e. after `m - 1`
/// steps, with no stopping shell.
pub fn position_at<R: Rng + ?Sized>(
    v: &Point,
    domain: &Domain,
    r: f64,
    m: u64,
    stream: &mut R,
) -> Result<Point> {
    check_r(r)?;
    if m == 0 {
        return Err(invalid("m", "the walk is indexed from 1"));
    }
    domain.require_interior(v)?;
    Ok(Point::from_vec(position_raw(domain, v, r, m, stream)))
}

pub(crate) fn position_raw<R: Rng + ?Sized>(domain: &Domain, v: &[f64], r: f64, m: u64, rng: &mut R) -> Vec<f64> {
    let d = v.len();
    let mut x = v.to_vec();
    let mut theta = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for _ in 1..m {
        let gap = domain.distance_raw(&x);
        fill_unit_sphere(rng, &mut theta);
        advance(domain, &mut x, gap, r, &theta, &mut scratch);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::geometry::dist;
    use crate::sampling::derive_stream;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn disk() -> Domain {
        Domain::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(WalkParams::new(0.0, 1e-4, 10).is_err());
        assert!(WalkParams::new(1.0, 1e-4, 10).is_err());
        assert!(WalkParams::new(1.5, 1e-4, 10).is_err());
        assert!(WalkParams::new(0.5, 0.0, 10).is_err());
        assert!(WalkParams::new(0.5, 1e-4, 0).is_err());
        let p = WalkParams::new(0.5, 3.0, 10).unwrap();
        assert!(p.validate_for(&disk()).is_err());
        let def = WalkParams::for_domain(&disk());
        assert_eq!(def.r(), 0.5);
        assert_eq!(def.epsilon(), 2e-4);
        assert_eq!(def.max_steps(), 100_000);
    }

    #[test]
    fn step_with_injected_direction() {
        let y = step_along(&p(&[0.0, 0.0]), &disk(), 0.5, &p(&[1.0, 0.0])).unwrap();
        assert_eq!(y, p(&[0.5, 0.0]));
        let y = step_along(&p(&[0.5, 0.0]), &disk(), 0.5, &p(&[0.0, 1.0])).unwrap();
        assert_eq!(y, p(&[0.5, 0.25]));
    }

    #[test]
    fn step_errors() {
        assert!(matches!(
            step_along(&p(&[1.5, 0.0]), &disk(), 0.5, &p(&[1.0, 0.0])),
            Err(Error::NotInterior(_))
        ));
        assert!(step_along(&p(&[0.0, 0.0]), &disk(), 1.0, &p(&[1.0, 0.0])).is_err());
        let mut s = derive_stream(1, 0);
        assert!(walk_step(&p(&[0.0, 2.0]), &disk(), 0.5, &mut s).is_err());
    }

    #[test]
    fn random_steps_stay_inside_with_exact_length() {
        let dom = disk();
        let mut s = derive_stream(2, 0);
        let mut x = p(&[0.9, 0.3]);
        for _ in 0..1000 {
            let gap = dom.distance_to_boundary(&x).unwrap();
            let y = walk_step(&x, &dom, 0.7, &mut s).unwrap();
            assert!(dom.contains(&y).unwrap());
            assert!((x.distance(&y) - 0.7 * gap).abs() <= 1e-12);
            x = y;
        }
    }

    #[test]
    fn walk_from_center_exits_on_circle() {
        let dom = disk();
        let params = WalkParams::new(0.5, 1e-4, 100_000).unwrap();
        for i in 0..200 {
            let res = run_walk(&p(&[0.0, 0.0]), &dom, &params, &mut derive_stream(3, i)).unwrap();
            assert!(!res.truncated);
            assert!((res.exit_point.norm() - 1.0).abs() <= 1e-9);
            assert!(res.final_gap <= 1e-4);
        }
    }

    #[test]
    fn interval_walk_exits_at_an_endpoint() {
        let dom = Domain::axis_box(vec![0.0], vec![1.0]).unwrap();
        let params = WalkParams::for_domain(&dom);
        for i in 0..200 {
            let res = run_walk(&p(&[0.5]), &dom, &params, &mut derive_stream(4, i)).unwrap();
            assert!(res.exit_point[0] == 0.0 || res.exit_point[0] == 1.0);
        }
    }

    #[test]
    fn truncation_flag_matches_cap() {
        let dom = disk();
        let params = WalkParams::new(0.1, 1e-8, 3).unwrap();
        let res = run_walk(&p(&[0.0, 0.0]), &dom, &params, &mut derive_stream(5, 0)).unwrap();
        assert!(res.truncated);
        assert_eq!(res.steps, 3);
        assert!(res.final_gap > params.epsilon());
        assert!((res.exit_point.norm() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn traced_iterates_are_interior_and_follow_step_law() {
        let dom = Domain::annulus(vec![0.0, 0.0], 0.5, 1.5).unwrap();
        let params = WalkParams::for_domain(&dom);
        for i in 0..100 {
            let mut trace: Vec<(Vec<f64>, f64)> = Vec::new();
            let res = run_walk_traced(&p(&[1.0, 0.0]), &dom, &params, &mut derive_stream(6, i), |x, g| {
                trace.push((x.to_vec(), g))
            })
            .unwrap();
            assert_eq!(trace.len() as u64, res.steps + 1);
            for w in trace.windows(2) {
                assert!(dom.contains_raw(&w[1].0));
                let len = dist(&w[0].0, &w[1].0);
                assert!((len - params.r() * w[0].1).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn first_position_is_start() {
        let v = p(&[0.3, 0.1]);
        let x = position_at(&v, &disk(), 0.5, 1, &mut derive_stream(0, 0)).unwrap();
        assert_eq!(x, v);
        assert!(position_at(&v, &disk(), 0.5, 0, &mut derive_stream(0, 0)).is_err());
    }

    #[test]
    fn same_stream_same_walk() {
        let dom = disk();
        let params = WalkParams::for_domain(&dom);
        let a = run_walk(&p(&[0.2, 0.2]), &dom, &params, &mut derive_stream(8, 8)).unwrap();
        let b = run_walk(&p(&[0.2, 0.2]), &dom, &params, &mut derive_stream(8, 8)).unwrap();
        assert_eq!(a, b);
    }
}
