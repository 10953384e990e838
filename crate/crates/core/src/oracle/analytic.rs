use crate::geometry::{dist, Domain, Patch, Point, Shape};
use crate::oracle::boundary::{fourier_sum, BoundaryFunction};

/// Closed-form harmonic extension of `f` into `domain`, evaluated at `x`.
///
/// Known cases: constants; coordinate functions (harmonic everywhere); the
/// planar harmonic polynomials; Fourier data on a disk (`Σ (ρ/R)^k (...)`);
/// one value per endpoint of an interval (linear interpolation); one value per
/// sphere of an annulus (radial log or `ρ^{2-d}` profile). Returns `None` for
/// any other pairing or when `x` is outside the closure.
pub fn analytic_solution(domain: &Domain, f: &BoundaryFunction, x: &Point) -> Option<f64> {
    if x.dim() != domain.dim() || f.validate_for(domain).is_err() {
        return None;
    }
    if !domain.contains_raw(x) && domain.boundary_gap_raw(x) > crate::geometry::BOUNDARY_TOL {
        return None;
    }
    match (f, domain.shape()) {
        (BoundaryFunction::Constant(c), _) => Some(*c),
        (BoundaryFunction::Coordinate(j), _) => Some(x[*j]),
        (BoundaryFunction::HarmonicPoly2D(poly), _) => Some(poly.eval(x[0], x[1])),
        (BoundaryFunction::FourierCircle { a, b }, Shape::Ball { center, radius }) => {
            let rho = dist(x, center);
            let theta = (x[1] - center[1]).atan2(x[0] - center[0]);
            Some(fourier_sum(a, b, theta, rho / radius))
        }
        (BoundaryFunction::PiecewiseLabel(patches), Shape::AxisBox { lo, hi }) if domain.dim() == 1 => {
            let lo_v = patch_value(patches, Patch::Face { axis: 0, upper: false })?;
            let hi_v = patch_value(patches, Patch::Face { axis: 0, upper: true })?;
            let t = (x[0] - lo[0]) / (hi[0] - lo[0]);
            Some(lo_v + t * (hi_v - lo_v))
        }
        (BoundaryFunction::PiecewiseLabel(patches), Shape::Annulus { center, r_in, r_out }) => {
            let inner = patch_value(patches, Patch::Inner)?;
            let outer = patch_value(patches, Patch::Outer)?;
            let rho = dist(x, center);
            let profile = |r: f64| {
                if domain.dim() == 2 {
                    r.ln()
                } else {
                    r.powf(2.0 - domain.dim() as f64)
                }
            };
            let t = (profile(rho) - profile(*r_in)) / (profile(*r_out) - profile(*r_in));
            Some(inner + t * (outer - inner))
        }
        _ => None,
    }
}

fn patch_value(patches: &[(Patch, f64)], patch: Patch) -> Option<f64> {
    patches.iter().find(|(p, _)| *p == patch).map(|(_, v)| *v)
}
