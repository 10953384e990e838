use crate::error::{Error, Result};
use crate::geometry::{Domain, Patch, Point, Shape};

/// Highest Fourier mode accepted for circle data.
pub const MAX_FOURIER_MODE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicPoly {
    /// `x^2 - y^2`
    X2MinusY2,
    /// `x * y`
    Xy,
}

impl HarmonicPoly {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            HarmonicPoly::X2MinusY2 => x * x - y * y,
            HarmonicPoly::Xy => x * y,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HarmonicPoly::X2MinusY2 => "x2-y2",
            HarmonicPoly::Xy => "xy",
        }
    }
}

/// Dirichlet data on the boundary of a domain.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryFunction {
    Constant(f64),
    /// The coordinate function `x -> x_j` (zero-based axis).
    Coordinate(usize),
    HarmonicPoly2D(HarmonicPoly),
    /// `f(θ) = Σ a_k cos kθ + b_k sin kθ`, with θ the polar angle about the
    /// center of a round planar domain.
    FourierCircle { a: Vec<f64>, b: Vec<f64> },
    /// One constant per separated boundary component.
    PiecewiseLabel(Vec<(Patch, f64)>),
}

fn round_center(domain: &Domain) -> Option<&[f64]> {
    match domain.shape() {
        Shape::Ball { center, .. }
        | Shape::Annulus { center, .. }
        | Shape::PuncturedBall { center, .. } => Some(center),
        _ => None,
    }
}

impl BoundaryFunction {
    /// Checks that the data is admissible (continuous) on `domain`.
    pub fn validate_for(&self, domain: &Domain) -> Result<()> {
        let d = domain.dim();
        match self {
            BoundaryFunction::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::BoundaryFunction("constant must be finite".into()));
                }
            }
            BoundaryFunction::Coordinate(j) => {
                if *j >= d {
                    return Err(Error::BoundaryFunction(format!(
                        "coordinate index {j} out of range for dimension {d}"
                    )));
                }
            }
            BoundaryFunction::HarmonicPoly2D(_) => {
                if d != 2 {
                    return Err(Error::BoundaryFunction(format!(
                        "harmonic polynomial data needs a planar domain, got dimension {d}"
                    )));
                }
            }
            BoundaryFunction::FourierCircle { a, b } => {
                if d != 2 || round_center(domain).is_none() {
                    return Err(Error::BoundaryFunction(
                        "fourier data needs a planar ball, annulus or punctured ball".into(),
                    ));
                }
                if a.len() > MAX_FOURIER_MODE + 1 || b.len() > MAX_FOURIER_MODE + 1 {
                    return Err(Error::BoundaryFunction(format!(
                        "at most {MAX_FOURIER_MODE} fourier modes are supported"
                    )));
                }
                if a.iter().chain(b).any(|c| !c.is_finite()) {
                    return Err(Error::BoundaryFunction("fourier coefficients must be finite".into()));
                }
            }
            BoundaryFunction::PiecewiseLabel(patches) => {
                let Some(components) = domain.boundary_components() else {
                    return Err(Error::BoundaryFunction(format!(
                        "piecewise data needs a boundary with separated components; {} has one",
                        domain.kind_name()
                    )));
                };
                for (i, (patch, value)) in patches.iter().enumerate() {
                    if !components.contains(patch) {
                        return Err(Error::BoundaryFunction(format!(
                            "patch `{patch}` is not a boundary component of {}",
                            domain.kind_name()
                        )));
                    }
                    if patches[..i].iter().any(|(p, _)| p == patch) {
                        return Err(Error::BoundaryFunction(format!("patch `{patch}` listed twice")));
                    }
                    if !value.is_finite() {
                        return Err(Error::BoundaryFunction("patch values must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Like [`validate_for`](Self::validate_for), and additionally requires
    /// piecewise data to assign every boundary component.
    pub fn validate_complete(&self, domain: &Domain) -> Result<()> {
        self.validate_for(domain)?;
        if let BoundaryFunction::PiecewiseLabel(patches) = self {
            for c in domain.boundary_components().unwrap_or_default() {
                if !patches.iter().any(|(p, _)| *p == c) {
                    return Err(Error::BoundaryFunction(format!("no value for boundary patch `{c}`")));
                }
            }
        }
        Ok(())
    }

    /// Evaluates the data at a boundary point (within 1e-9 of the boundary).
    pub fn eval_boundary(&self, domain: &Domain, x: &Point) -> Result<f64> {
        domain.require_boundary(x)?;
        self.validate_for(domain)?;
        self.value_raw(domain, x)
    }

    /// Evaluates the formula at `x` with no boundary check.
    pub(crate) fn value_raw(&self, domain: &Domain, x: &[f64]) -> Result<f64> {
        Ok(match self {
            BoundaryFunction::Constant(c) => *c,
            BoundaryFunction::Coordinate(j) => x[*j],
            BoundaryFunction::HarmonicPoly2D(poly) => poly.eval(x[0], x[1]),
            BoundaryFunction::FourierCircle { a, b } => {
                let c = round_center(domain).unwrap_or(&[0.0, 0.0]);
                let theta = (x[1] - c[1]).atan2(x[0] - c[0]);
                fourier_sum(a, b, theta, 1.0)
            }
            BoundaryFunction::PiecewiseLabel(patches) => {
                let patch = domain.boundary_patch(x);
                patches
                    .iter()
                    .find(|(p, _)| *p == patch)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| Error::BoundaryFunction(format!("no value for boundary patch `{patch}`")))?
            }
        })
    }

    /// Upper bound on `|f|` over the closure of `domain`.
    pub fn magnitude_bound(&self, domain: &Domain) -> f64 {
        let (lo, hi) = domain.bounding_box();
        let abs_max = |i: usize| lo[i].abs().max(hi[i].abs());
        let sq_range = |i: usize| {
            let top = lo[i].powi(2).max(hi[i].powi(2));
            let bottom = if lo[i] <= 0.0 && hi[i] >= 0.0 {
                0.0
            } else {
                lo[i].powi(2).min(hi[i].powi(2))
            };
            (bottom, top)
        };
        match self {
            BoundaryFunction::Constant(c) => c.abs(),
            BoundaryFunction::Coordinate(j) => abs_max(*j),
            BoundaryFunction::HarmonicPoly2D(HarmonicPoly::X2MinusY2) => {
                let (x_lo, x_hi) = sq_range(0);
                let (y_lo, y_hi) = sq_range(1);
                (x_lo - y_hi).abs().max((x_hi - y_lo).abs())
            }
            BoundaryFunction::HarmonicPoly2D(HarmonicPoly::Xy) => abs_max(0) * abs_max(1),
            BoundaryFunction::FourierCircle { a, b } => a.iter().chain(b).map(|c| c.abs()).sum(),
            BoundaryFunction::PiecewiseLabel(p) => p.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max),
        }
    }
}

/// `Σ ρ^k (a_k cos kθ + b_k sin kθ)`.
pub(crate) fn fourier_sum(a: &[f64], b: &[f64], theta: f64, rho: f64) -> f64 {
    let modes = a.len().max(b.len());
    let mut sum = 0.0;
    let mut scale = 1.0;
    for k in 0..modes {
        let kt = k as f64 * theta;
        let ak = a.get(k).copied().unwrap_or(0.0);
        let bk = b.get(k).copied().unwrap_or(0.0);
        sum += scale * (ak * kt.cos() + bk * kt.sin());
        scale *= rho;
    }
    sum
}

/// Point at polar angle `theta` on the circle of `radius` about `center`.
pub fn circle_point(center: &[f64], radius: f64, theta: f64) -> Point {
    Point::from_vec(vec![center[0] + radius * theta.cos(), center[1] + radius * theta.sin()])
}
