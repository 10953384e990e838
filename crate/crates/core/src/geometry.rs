//! Bounded open domains with exact distance-to-boundary and nearest-point queries.
//!
//! The catalog is closed: balls, axis-aligned boxes, convex polytopes given as
//! intersections of halfspaces, annuli (spherical shells), and punctured balls.
//! For every variant the distance from an interior point to the boundary has a
//! closed form, which the walk relies on for its step length.
//!
//! Nearest-point ties are broken deterministically: for a degenerate radial
//! direction (query at the center of a ball) the first coordinate axis is used
//! in the positive direction; box faces are scanned by ascending axis with the
//! lower face first; any other tie picks the lexicographically smallest
//! candidate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Absolute tolerance for "this point lies on the boundary".
pub const BOUNDARY_TOL: f64 = 1e-9;

/// A position in R^d with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("point", "a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point", format!("non-finite coordinate in {coords:?}")));
        }
        Ok(Point(coords))
    }

    /// Builds a point without validation. Callers guarantee finiteness.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// One constraint `normal · x < offset` of a convex polytope, with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A labelled connected piece of the boundary, used by piecewise boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Patch {
    /// Outer sphere of a ball, annulus or punctured ball.
    Outer,
    /// Inner sphere of an annulus.
    Inner,
    /// The removed point of a punctured ball.
    Puncture,
    /// Face of a box orthogonal to `axis`; `upper` selects the `hi` side.
    Face { axis: usize, upper: bool },
    /// Facet of a polytope, by halfspace index.
    Facet(usize),
}

impl fmt::Display for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Patch::Outer => write!(f, "outer"),
            Patch::Inner => write!(f, "inner"),
            Patch::Puncture => write!(f, "puncture"),
            Patch::Face { axis, upper: false } => write!(f, "lo{axis}"),
            Patch::Face { axis, upper: true } => write!(f, "hi{axis}"),
            Patch::Facet(k) => write!(f, "facet{k}"),
        }
    }
}

impl FromStr for Patch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::BoundaryFunction(format!(
                "unknown patch `{s}` (expected outer, inner, puncture, lo<i>, hi<i> or facet<k>)"
            ))
        };
        match s {
            "outer" => Ok(Patch::Outer),
            "inner" => Ok(Patch::Inner),
            "puncture" => Ok(Patch::Puncture),
            _ => {
                let (prefix, num) = if let Some(n) = s.strip_prefix("lo") {
                    ("lo", n)
                } else if let Some(n) = s.strip_prefix("hi") {
                    ("hi", n)
                } else if let Some(n) = s.strip_prefix("facet") {
                    ("facet", n)
                } else {
                    return Err(bad());
                };
                let idx: usize = num.parse().map_err(|_| bad())?;
                Ok(match prefix {
                    "lo" => Patch::Face { axis: idx, upper: false },
                    "hi" => Patch::Face { axis: idx, upper: true },
                    _ => Patch::Facet(idx),
                })
            }
        }
    }
}

/// The catalog variants. Read-only view of a validated [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    AxisBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Polytope {
        halfspaces: Vec<Halfspace>,
        vertices: Vec<Vec<f64>>,
    },
    Annulus {
        center: Vec<f64>,
        r_in: f64,
        r_out: f64,
    },
    PuncturedBall {
        center: Vec<f64>,
        radius: f64,
        puncture: Vec<f64>,
    },
}

/// A tangent ball outside the domain touching its closure at a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorBall {
    pub center: Point,
    pub radius: f64,
}

/// A nonempty bounded open subset of R^d from the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    shape: Shape,
    dim: usize,
    diameter: f64,
}

fn check_finite(field: &'static str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(invalid(field, "must have at least one coordinate"));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(invalid(field, "coordinates must be finite"));
    }
    Ok(())
}

fn check_radius(field: &'static str, r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid(field, format!("must be a finite positive number, got {r}")));
    }
    Ok(())
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_finite("center", &center)?;
        check_radius("radius", radius)?;
        let dim = center.len();
        Ok(Domain {
            shape: Shape::Ball { center, radius },
            dim,
            diameter: 2.0 * radius,
        })
    }

    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_finite("lo", &lo)?;
        check_finite("hi", &hi)?;
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(invalid("hi", "every lo_i must be strictly below hi_i"));
        }
        let dim = lo.len();
        let diameter = dist(&lo, &hi);
        Ok(Domain {
            shape: Shape::AxisBox { lo, hi },
            dim,
            diameter,
        })
    }

    /// Convex polytope `{x : n_k · x < b_k for all k}`. Normals are rescaled to
    /// unit length (with the offset scaled to match).
    pub fn polytope(halfspaces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let Some(first) = halfspaces.first() else {
            return Err(invalid("halfspaces", "at least one halfspace is required"));
        };
        let dim = first.0.len();
        let mut hs = Vec::with_capacity(halfspaces.len());
        for (normal, offset) in halfspaces {
            check_finite("normal", &normal)?;
            if normal.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: normal.len(),
                });
            }
            if !offset.is_finite() {
                return Err(invalid("offset", "must be finite"));
            }
            let len = norm(&normal);
            if len < 1e-12 {
                return Err(invalid("normal", "normal vector must be nonzero"));
            }
            hs.push(Halfspace {
                normal: normal.iter().map(|c| c / len).collect(),
                offset: offset / len,
            });
        }
        if hs.len() <= dim {
            return Err(Error::InvalidDomain(format!(
                "a bounded polytope in R^{dim} needs at least {} halfspaces",
                dim + 1
            )));
        }
        if has_recession_direction(&hs, dim) {
            return Err(Error::InvalidDomain("polytope is unbounded".into()));
        }
        let vertices = enumerate_vertices(&hs, dim)?;
        if vertices.is_empty() {
            return Err(Error::InvalidDomain("polytope is empty".into()));
        }
        let centroid = centroid(&vertices);
        let min_slack = hs
            .iter()
            .map(|h| h.offset - dot(&h.normal, &centroid))
            .fold(f64::INFINITY, f64::min);
        if min_slack <= 1e-12 {
            return Err(Error::InvalidDomain("polytope has empty interior".into()));
        }
        let mut diameter: f64 = 0.0;
        for (i, a) in vertices.iter().enumerate() {
            for b in &vertices[i + 1..] {
                diameter = diameter.max(dist(a, b));
            }
        }
        Ok(Domain {
            shape: Shape::Polytope {
                halfspaces: hs,
                vertices,
            },
            dim,
            diameter,
        })
    }

    pub fn annulus(center: Vec<f64>, r_in: f64, r_out: f64) -> Result<Self> {
        check_finite("center", &center)?;
        check_radius("r_in", r_in)?;
        check_radius("r_out", r_out)?;
        if r_in >= r_out {
            return Err(invalid("r_out", format!("must exceed r_in ({r_in}), got {r_out}")));
        }
        let dim = center.len();
        Ok(Domain {
            shape: Shape::Annulus { center, r_in, r_out },
            dim,
            diameter: 2.0 * r_out,
        })
    }

    pub fn punctured_ball(center: Vec<f64>, radius: f64, puncture: Vec<f64>) -> Result<Self> {
        check_finite("center", &center)?;
        check_finite("puncture", &puncture)?;
        check_radius("radius", radius)?;
        if puncture.len() != center.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: puncture.len(),
            });
        }
        if dist(&center, &puncture) >= radius {
            return Err(invalid("puncture", "must lie strictly inside the ball"));
        }
        let dim = center.len();
        Ok(Domain {
            shape: Shape::PuncturedBall {
                center,
                radius,
                puncture,
            },
            dim,
            diameter: 2.0 * radius,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exact diameter (supremum of pairwise distances) of the domain.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn kind_name(&self) -> &'static str {
        match self.shape {
            Shape::Ball { .. } => "ball",
            Shape::AxisBox { .. } => "box",
            Shape::Polytope { .. } => "polytope",
            Shape::Annulus { .. } => "annulus",
            Shape::PuncturedBall { .. } => "punctured_ball",
        }
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }

    /// Strict interior membership; boundary points are excluded.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.check_dim(x.dim())?;
        Ok(self.contains_raw(x))
    }

    pub fn distance_to_boundary(&self, x: &Point) -> Result<f64> {
        self.require_interior(x)?;
        Ok(self.distance_raw(x))
    }

    pub fn project_to_boundary(&self, x: &Point) -> Result<Point> {
        self.require_interior(x)?;
        let mut out = vec![0.0; self.dim];
        self.nearest_boundary_raw(x, &mut out);
        Ok(Point::from_vec(out))
    }

    pub(crate) fn require_interior(&self, x: &Point) -> Result<()> {
        if !self.contains(x)? {
            return Err(Error::NotInterior(x.to_vec()));
        }
        Ok(())
    }

    pub(crate) fn contains_raw(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => dist(x, center) < *radius,
            Shape::AxisBox { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *a < *v && *v < *b),
            Shape::Polytope { halfspaces, .. } => halfspaces
                .iter()
                .all(|h| dot(&h.normal, x) < h.offset),
            Shape::Annulus { center, r_in, r_out } => {
                let r = dist(x, center);
                *r_in < r && r < *r_out
            }
            Shape::PuncturedBall {
                center,
                radius,
                puncture,
            } => dist(x, center) < *radius && x != puncture.as_slice(),
        }
    }

    /// Distance from an interior point to the boundary. Unchecked.
    pub(crate) fn distance_raw(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => radius - dist(x, center),
            Shape::AxisBox { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (a, b))| (v - a).min(b - v))
                .fold(f64::INFINITY, f64::min),
            Shape::Polytope { halfspaces, .. } => halfspaces
                .iter()
                .map(|h| h.offset - dot(&h.normal, x))
                .fold(f64::INFINITY, f64::min),
            Shape::Annulus { center, r_in, r_out } => {
                let r = dist(x, center);
                (r - r_in).min(r_out - r)
            }
            Shape::PuncturedBall {
                center,
                radius,
                puncture,
            } => (radius - dist(x, center)).min(dist(x, puncture)),
        }
    }

    /// Unsigned distance-like residual to the boundary for any point, used to
    /// test "lies on the boundary". Exact for every variant except outside a
    /// polytope, where it is the largest constraint violation.
    pub fn boundary_gap(&self, x: &Point) -> Result<f64> {
        self.check_dim(x.dim())?;
        Ok(self.boundary_gap_raw(x))
    }

    pub(crate) fn boundary_gap_raw(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => (dist(x, center) - radius).abs(),
            Shape::AxisBox { lo, hi } => {
                if self.contains_raw(x) {
                    self.distance_raw(x)
                } else {
                    let outside: f64 = x
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(v, (a, b))| {
                            let e = (a - v).max(v - b).max(0.0);
                            e * e
                        })
                        .sum();
                    outside.sqrt()
                }
            }
            Shape::Polytope { halfspaces, .. } => halfspaces
                .iter()
                .map(|h| dot(&h.normal, x) - h.offset)
                .fold(f64::NEG_INFINITY, f64::max)
                .abs(),
            Shape::Annulus { center, r_in, r_out } => {
                let r = dist(x, center);
                (r - r_in).abs().min((r - r_out).abs())
            }
            Shape::PuncturedBall {
                center,
                radius,
                puncture,
            } => (dist(x, center) - radius).abs().min(dist(x, puncture)),
        }
    }

    pub(crate) fn require_boundary(&self, x: &Point) -> Result<()> {
        let gap = self.boundary_gap(x)?;
        if gap > BOUNDARY_TOL {
            return Err(Error::NotOnBoundary {
                point: x.to_vec(),
                gap,
            });
        }
        Ok(())
    }

    /// Writes a nearest boundary point of `x` into `out`. Exact for interior
    /// points; also used for points within tolerance of the boundary.
    pub(crate) fn nearest_boundary_raw(&self, x: &[f64], out: &mut [f64]) {
        match &self.shape {
            Shape::Ball { center, radius } => radial(center, *radius, x, out),
            Shape::AxisBox { lo, hi } => {
                if self.contains_raw(x) {
                    out.copy_from_slice(x);
                    let mut best = f64::INFINITY;
                    let mut face = (0, lo[0]);
                    for i in 0..x.len() {
                        let dl = x[i] - lo[i];
                        if dl < best {
                            best = dl;
                            face = (i, lo[i]);
                        }
                        let dh = hi[i] - x[i];
                        if dh < best {
                            best = dh;
                            face = (i, hi[i]);
                        }
                    }
                    out[face.0] = face.1;
                } else {
                    for i in 0..x.len() {
                        out[i] = x[i].clamp(lo[i], hi[i]);
                    }
                }
            }
            Shape::Polytope { halfspaces, .. } => {
                let mut best = f64::INFINITY;
                let mut cand = vec![0.0; x.len()];
                for h in halfspaces {
                    let slack = h.offset - dot(&h.normal, x);
                    let closer = slack < best;
                    if closer || slack == best {
                        for (c, (xi, ni)) in cand.iter_mut().zip(x.iter().zip(&h.normal)) {
                            *c = xi + slack * ni;
                        }
                        if closer || lex_cmp(&cand, out) == Ordering::Less {
                            out.copy_from_slice(&cand);
                        }
                        best = slack;
                    }
                }
            }
            Shape::Annulus { center, r_in, r_out } => {
                let r = dist(x, center);
                let (din, dout) = ((r - r_in).abs(), (r - r_out).abs());
                if din < dout {
                    radial(center, *r_in, x, out);
                } else if dout < din {
                    radial(center, *r_out, x, out);
                } else {
                    let mut other = vec![0.0; x.len()];
                    radial(center, *r_in, x, out);
                    radial(center, *r_out, x, &mut other);
                    if lex_cmp(&other, out) == Ordering::Less {
                        out.copy_from_slice(&other);
                    }
                }
            }
            Shape::PuncturedBall {
                center,
                radius,
                puncture,
            } => {
                let dsphere = (dist(x, center) - radius).abs();
                let dpunct = dist(x, puncture);
                radial(center, *radius, x, out);
                if dpunct < dsphere
                    || (dpunct == dsphere && lex_cmp(puncture, out) == Ordering::Less)
                {
                    out.copy_from_slice(puncture);
                }
            }
        }
    }

    /// Which boundary piece the (near-)boundary point `x` belongs to.
    pub fn boundary_patch(&self, x: &[f64]) -> Patch {
        match &self.shape {
            Shape::Ball { .. } => Patch::Outer,
            Shape::AxisBox { lo, hi } => {
                let mut best = f64::INFINITY;
                let mut patch = Patch::Face { axis: 0, upper: false };
                for i in 0..x.len() {
                    let dl = (x[i] - lo[i]).abs();
                    if dl < best {
                        best = dl;
                        patch = Patch::Face { axis: i, upper: false };
                    }
                    let dh = (hi[i] - x[i]).abs();
                    if dh < best {
                        best = dh;
                        patch = Patch::Face { axis: i, upper: true };
                    }
                }
                patch
            }
            Shape::Polytope { halfspaces, .. } => {
                let mut best = f64::INFINITY;
                let mut k = 0;
                for (i, h) in halfspaces.iter().enumerate() {
                    let g = (h.offset - dot(&h.normal, x)).abs();
                    if g < best {
                        best = g;
                        k = i;
                    }
                }
                Patch::Facet(k)
            }
            Shape::Annulus { center, r_in, r_out } => {
                let r = dist(x, center);
                if (r - r_in).abs() < (r - r_out).abs() {
                    Patch::Inner
                } else {
                    Patch::Outer
                }
            }
            Shape::PuncturedBall {
                center,
                radius,
                puncture,
            } => {
                if dist(x, puncture) < (dist(x, center) - radius).abs() {
                    Patch::Puncture
                } else {
                    Patch::Outer
                }
            }
        }
    }

    /// Patches admitted as separated boundary components, if the boundary
    /// splits into more than one component.
    pub fn boundary_components(&self) -> Option<Vec<Patch>> {
        match &self.shape {
            Shape::Annulus { .. } => Some(vec![Patch::Inner, Patch::Outer]),
            Shape::PuncturedBall { .. } => Some(vec![Patch::Outer, Patch::Puncture]),
            Shape::AxisBox { .. } if self.dim == 1 => Some(vec![
                Patch::Face { axis: 0, upper: false },
                Patch::Face { axis: 0, upper: true },
            ]),
            _ => None,
        }
    }

    /// A Poincaré exterior ball at the boundary point `v`, when the variant
    /// admits one in closed form.
    pub fn exterior_ball(&self, v: &Point) -> Result<Option<ExteriorBall>> {
        self.require_boundary(v)?;
        let s_default = self.diameter / 10.0;
        let tangent_out = |center: &[f64], radius: f64, s: f64| {
            let mut foot = vec![0.0; v.dim()];
            radial(center, radius, v, &mut foot);
            let r = dist(&foot, center);
            let u: Vec<f64> = foot
                .iter()
                .zip(center)
                .map(|(f, c)| f + s * (f - c) / r)
                .collect();
            ExteriorBall {
                center: Point::from_vec(u),
                radius: s,
            }
        };
        let ball = match &self.shape {
            Shape::Ball { center, radius } => Some(tangent_out(center, *radius, s_default)),
            Shape::AxisBox { lo, hi } => {
                let mut w = vec![0.0; self.dim];
                for i in 0..self.dim {
                    if (v[i] - lo[i]).abs() <= BOUNDARY_TOL {
                        w[i] -= 1.0;
                    }
                    if (v[i] - hi[i]).abs() <= BOUNDARY_TOL {
                        w[i] += 1.0;
                    }
                }
                supporting_ball(v, &w, s_default)
            }
            Shape::Polytope { halfspaces, .. } => {
                let mut w = vec![0.0; self.dim];
                for h in halfspaces {
                    if (dot(&h.normal, v) - h.offset).abs() <= BOUNDARY_TOL {
                        for (wi, ni) in w.iter_mut().zip(&h.normal) {
                            *wi += ni;
                        }
                    }
                }
                supporting_ball(v, &w, s_default)
            }
            Shape::Annulus { center, r_in, r_out } => {
                let r = dist(v, center);
                if (r - r_out).abs() <= (r - r_in).abs() {
                    Some(tangent_out(center, *r_out, s_default))
                } else {
                    // ball inside the hole, strictly smaller than the hole
                    let s = s_default.min(0.5 * r_in);
                    let mut foot = vec![0.0; self.dim];
                    radial(center, *r_in, v, &mut foot);
                    let u: Vec<f64> = foot
                        .iter()
                        .zip(center)
                        .map(|(f, c)| f - s * (f - c) / r_in)
                        .collect();
                    Some(ExteriorBall {
                        center: Point::from_vec(u),
                        radius: s,
                    })
                }
            }
            Shape::PuncturedBall {
                center,
                radius,
                puncture,
            } => {
                if dist(v, puncture) <= BOUNDARY_TOL {
                    None
                } else {
                    Some(tangent_out(center, *radius, s_default))
                }
            }
        };
        Ok(ball)
    }

    /// Axis-aligned bounding box `(lo, hi)` of the closure.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let around = |c: &[f64], r: f64| {
            (
                c.iter().map(|v| v - r).collect(),
                c.iter().map(|v| v + r).collect(),
            )
        };
        match &self.shape {
            Shape::Ball { center, radius } => around(center, *radius),
            Shape::AxisBox { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Polytope { vertices, .. } => {
                let mut lo = vec![f64::INFINITY; self.dim];
                let mut hi = vec![f64::NEG_INFINITY; self.dim];
                for v in vertices {
                    for i in 0..self.dim {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                (lo, hi)
            }
            Shape::Annulus { center, r_out, .. } => around(center, *r_out),
            Shape::PuncturedBall { center, radius, .. } => around(center, *radius),
        }
    }

    /// A fixed, well-inside point of the domain.
    pub fn reference_point(&self) -> Point {
        let coords = match &self.shape {
            Shape::Ball { center, .. } => center.clone(),
            Shape::AxisBox { lo, hi } => lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            Shape::Polytope { vertices, .. } => centroid(vertices),
            Shape::Annulus { center, r_in, r_out } => {
                let mut c = center.clone();
                c[0] += 0.5 * (r_in + r_out);
                c
            }
            Shape::PuncturedBall { center, radius, .. } => {
                let mut best = center.clone();
                let mut best_d = if self.contains_raw(center) {
                    self.distance_raw(center)
                } else {
                    0.0
                };
                for sign in [1.0, -1.0] {
                    let mut c = center.clone();
                    c[0] += sign * 0.5 * radius;
                    let d = self.distance_raw(&c);
                    if d > best_d {
                        best_d = d;
                        best = c;
                    }
                }
                best
            }
        };
        Point::from_vec(coords)
    }

    /// Uniform interior sample by rejection from the bounding box.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let (lo, hi) = self.bounding_box();
        loop {
            let x: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| a + (b - a) * rng.random::<f64>())
                .collect();
            if self.contains_raw(&x) {
                return Point::from_vec(x);
            }
        }
    }

    /// Characteristic boundary points of the variant (poles, corners, face
    /// centers, vertices, the puncture).
    pub fn landmark_boundary_points(&self) -> Vec<Point> {
        let d = self.dim;
        let axis_points = |c: &[f64], r: f64| {
            let mut pts = Vec::with_capacity(2 * d);
            for i in 0..d {
                for sign in [1.0, -1.0] {
                    let mut p = c.to_vec();
                    p[i] += sign * r;
                    pts.push(p);
                }
            }
            pts
        };
        let pts: Vec<Vec<f64>> = match &self.shape {
            Shape::Ball { center, radius } => axis_points(center, *radius),
            Shape::AxisBox { lo, hi } => {
                let mut pts = Vec::new();
                if d <= 4 {
                    for mask in 0..(1usize << d) {
                        pts.push(
                            (0..d)
                                .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                                .collect(),
                        );
                    }
                }
                let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
                for i in 0..d {
                    for side in [lo[i], hi[i]] {
                        let mut p = mid.clone();
                        p[i] = side;
                        pts.push(p);
                    }
                }
                pts
            }
            Shape::Polytope { halfspaces, vertices } => {
                let mut pts = vertices.clone();
                let c = centroid(vertices);
                for h in halfspaces {
                    let slack = h.offset - dot(&h.normal, &c);
                    pts.push(c.iter().zip(&h.normal).map(|(x, n)| x + slack * n).collect());
                }
                pts
            }
            Shape::Annulus { center, r_in, r_out } => {
                let mut pts = axis_points(center, *r_out);
                pts.extend(axis_points(center, *r_in));
                pts
            }
            Shape::PuncturedBall {
                center,
                radius,
                puncture,
            } => {
                let mut pts = axis_points(center, *radius);
                pts.push(puncture.clone());
                pts
            }
        };
        pts.into_iter()
            .map(Point::from_vec)
            .filter(|p| self.boundary_gap_raw(p) <= BOUNDARY_TOL)
            .collect()
    }
}

/// Nearest point of the sphere S_radius(center) to `x`.
fn radial(center: &[f64], radius: f64, x: &[f64], out: &mut [f64]) {
    let r = dist(x, center);
    if r == 0.0 {
        out.copy_from_slice(center);
        out[0] += radius;
        return;
    }
    for (o, (xi, ci)) in out.iter_mut().zip(x.iter().zip(center)) {
        *o = ci + radius * (xi - ci) / r;
    }
}

fn supporting_ball(v: &Point, w: &[f64], s: f64) -> Option<ExteriorBall> {
    let len = norm(w);
    if len < 1e-12 {
        return None;
    }
    let u = v.iter().zip(w).map(|(vi, wi)| vi + s * wi / len).collect();
    Some(ExteriorBall {
        center: Point::from_vec(u),
        radius: s,
    })
}

fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    let mut c = vec![0.0; d];
    for p in points {
        for i in 0..d {
            c[i] += p[i];
        }
    }
    let n = points.len() as f64;
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

const MAX_SUBSETS: f64 = 2.0e6;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// True when some nonzero `y` satisfies `n_k · y <= 0` for every halfspace.
///
/// Such a cone, if nontrivial and pointed, has an extreme ray spanned by the
/// kernel of `d - 1` independent constraint rows; a non-pointed cone contains
/// a line, which also makes some kernel direction feasible.
fn has_recession_direction(hs: &[Halfspace], dim: usize) -> bool {
    let m = hs.len();
    let feasible = |y: &[f64]| hs.iter().all(|h| dot(&h.normal, y) <= 1e-12);
    // rank deficiency: the normals miss some direction entirely
    let normals = DMatrix::from_fn(m, dim, |i, j| hs[i].normal[j]);
    if normals.clone().svd(false, false).rank(1e-10) < dim {
        return true;
    }
    if dim == 1 {
        return feasible(&[1.0]) || feasible(&[-1.0]);
    }
    let mut found = false;
    for_each_subset(m, dim - 1, |rows| {
        if found {
            return;
        }
        // kernel vector by signed cofactors of the (d-1) x d matrix
        let mut y: Vec<f64> = (0..dim)
            .map(|j| {
                let minor = DMatrix::from_fn(dim - 1, dim - 1, |r, c| {
                    let col = if c < j { c } else { c + 1 };
                    hs[rows[r]].normal[col]
                });
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * minor.determinant()
            })
            .collect();
        let len = norm(&y);
        if len < 1e-10 {
            return;
        }
        y.iter_mut().for_each(|v| *v /= len);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        if feasible(&y) || feasible(&neg) {
            found = true;
        }
    });
    found
}

fn enumerate_vertices(hs: &[Halfspace], dim: usize) -> Result<Vec<Vec<f64>>> {
    if binomial(hs.len(), dim) > MAX_SUBSETS {
        return Err(Error::InvalidDomain(format!(
            "too many halfspaces ({}) for exact vertex enumeration in R^{dim}",
            hs.len()
        )));
    }
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for_each_subset(hs.len(), dim, |rows| {
        let a = DMatrix::from_fn(dim, dim, |r, c| hs[rows[r]].normal[c]);
        let b = DVector::from_fn(dim, |r, _| hs[rows[r]].offset);
        let Some(x) = a.lu().solve(&b) else {
            return;
        };
        let x: Vec<f64> = x.iter().copied().collect();
        if x.iter().any(|v| !v.is_finite()) {
            return;
        }
        let feasible = hs.iter().all(|h| dot(&h.normal, &x) - h.offset <= 1e-9);
        if feasible && !vertices.iter().any(|v| dist(v, &x) <= 1e-9) {
            vertices.push(x);
        }
    });
    Ok(vertices)
}
