//! Run configuration: a JSON object describing the domain, boundary data, walk
//! parameters, sampling, evaluation points and output.
//!
//! ```json
//! {
//!   "domain":   {"type": "ball", "center": [0, 0], "radius": 1.0},
//!   "boundary": {"type": "coordinate", "index": 0},
//!   "walk":     {"r": 0.5, "epsilon": "auto", "max_steps": 100000},
//!   "sampling": {"n_samples": 10000, "seed": 42},
//!   "points":   [[0.1, 0.2], [0.3, 0.0]],
//!   "output":   "solution.csv"
//! }
//! ```
//!
//! `points` may instead be a grid, `{"ranges": [[0, 1], [0, 1]], "counts": [11, 11]}`.
//! Unknown keys are rejected.

use serde::Deserialize;

use crate::error::Error;
use crate::geometry::{Domain, Patch, Point};
use crate::oracle::{BoundaryFunction, HarmonicPoly};
use crate::walk::{auto_epsilon, WalkParams, DEFAULT_MAX_STEPS, DEFAULT_R};

pub const DEFAULT_N_SAMPLES: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: &str, err: Error) -> Self {
        let message = match err {
            Error::InvalidParameter { field: inner, reason } => format!("{inner}: {reason}"),
            other => other.to_string(),
        };
        ConfigError::Field {
            field: field.to_string(),
            message,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Solve,
    Diagnose,
    Verify,
    Bench,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(alias = "axis_box")]
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Polytope {
        halfspaces: Vec<HalfspaceSpec>,
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

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl DomainSpec {
    pub fn build(&self) -> crate::Result<Domain> {
        match self.clone() {
            DomainSpec::Ball { center, radius } => Domain::ball(center, radius),
            DomainSpec::Box { lo, hi } => Domain::axis_box(lo, hi),
            DomainSpec::Polytope { halfspaces } => {
                Domain::polytope(halfspaces.into_iter().map(|h| (h.normal, h.offset)).collect())
            }
            DomainSpec::Annulus { center, r_in, r_out } => Domain::annulus(center, r_in, r_out),
            DomainSpec::PuncturedBall {
                center,
                radius,
                puncture,
            } => Domain::punctured_ball(center, radius, puncture),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum PolyKind {
    #[serde(rename = "x2-y2")]
    X2MinusY2,
    #[serde(rename = "xy")]
    Xy,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Constant {
        value: f64,
    },
    Coordinate {
        index: usize,
    },
    HarmonicPoly {
        kind: PolyKind,
    },
    Fourier {
        #[serde(default)]
        a: Vec<f64>,
        #[serde(default)]
        b: Vec<f64>,
    },
    Piecewise {
        patches: Vec<PatchValue>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchValue {
    pub patch: String,
    pub value: f64,
}

impl BoundarySpec {
    pub fn build(&self) -> crate::Result<BoundaryFunction> {
        Ok(match self {
            BoundarySpec::Constant { value } => BoundaryFunction::Constant(*value),
            BoundarySpec::Coordinate { index } => BoundaryFunction::Coordinate(*index),
            BoundarySpec::HarmonicPoly { kind } => BoundaryFunction::HarmonicPoly2D(match kind {
                PolyKind::X2MinusY2 => HarmonicPoly::X2MinusY2,
                PolyKind::Xy => HarmonicPoly::Xy,
            }),
            BoundarySpec::Fourier { a, b } => BoundaryFunction::FourierCircle {
                a: a.clone(),
                b: b.clone(),
            },
            BoundarySpec::Piecewise { patches } => BoundaryFunction::PiecewiseLabel(
                patches
                    .iter()
                    .map(|p| Ok((p.patch.parse::<Patch>()?, p.value)))
                    .collect::<crate::Result<_>>()?,
            ),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkSpec {
    r: Option<f64>,
    epsilon: Option<EpsilonSpec>,
    max_steps: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingSpec {
    n_samples: Option<u64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub ranges: Vec<[f64; 2]>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PointsSpec {
    List(Vec<Vec<f64>>),
    Grid(GridSpec),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchSpec {
    r_values: Option<Vec<f64>>,
    epsilons: Option<Vec<f64>>,
    n: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: DomainSpec,
    boundary: BoundarySpec,
    #[serde(default)]
    walk: WalkSpec,
    #[serde(default)]
    sampling: SamplingSpec,
    mode: Option<Mode>,
    points: Option<PointsSpec>,
    output: Option<String>,
    #[serde(default)]
    bench: BenchSpec,
}

/// Epsilon as written in the config; `Auto` resolves to 1e-4 x diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Auto,
    Absolute(f64),
}

/// Step-count benchmark grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchGrid {
    pub r_values: Vec<f64>,
    /// Stopping shells as fractions of the domain diameter.
    pub epsilon_fractions: Vec<f64>,
    pub n: u64,
}

impl Default for BenchGrid {
    fn default() -> Self {
        BenchGrid {
            r_values: vec![0.3, 0.5, 0.7, 0.9],
            epsilon_fractions: vec![1e-3, 1e-4, 1e-5],
            n: 10_000,
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub domain: Domain,
    pub boundary: BoundaryFunction,
    pub r: f64,
    pub epsilon: Epsilon,
    pub max_steps: u64,
    pub n_samples: u64,
    pub seed: u64,
    pub mode: Option<Mode>,
    /// Explicit points, or the grid expanded in row-major order (last axis fastest).
    pub points: Vec<Point>,
    pub output: Option<String>,
    pub bench: BenchGrid,
}

impl Config {
    pub fn walk_params(&self) -> crate::Result<WalkParams> {
        let eps = match self.epsilon {
            Epsilon::Auto => auto_epsilon(&self.domain),
            Epsilon::Absolute(e) => e,
        };
        let params = WalkParams::new(self.r, eps, self.max_steps)?;
        params.validate_for(&self.domain)?;
        Ok(params)
    }

    /// Re-checks cross-field constraints after command-line overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.walk_params().map_err(|e| ConfigError::field(walk_field(&e), e))?;
        if self.n_samples == 0 {
            return Err(ConfigError::Field {
                field: "sampling.n_samples".into(),
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

fn walk_field(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter { field: "r", .. } => "walk.r",
        Error::InvalidParameter { field: "max_steps", .. } => "walk.max_steps",
        _ => "walk.epsilon",
    }
}

/// Strict parse of a JSON config, with defaults applied and every constraint checked.
pub fn parse_config(text: &[u8]) -> Result<Config, ConfigError> {
    let raw: RawConfig = serde_json::from_slice(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let domain = raw.domain.build().map_err(|e| ConfigError::field("domain", e))?;
    let boundary = raw.boundary.build().map_err(|e| ConfigError::field("boundary", e))?;
    boundary
        .validate_for(&domain)
        .map_err(|e| ConfigError::field("boundary", e))?;

    let epsilon = match raw.walk.epsilon {
        None => Epsilon::Auto,
        Some(EpsilonSpec::Keyword(k)) if k == "auto" => Epsilon::Auto,
        Some(EpsilonSpec::Keyword(k)) => {
            return Err(ConfigError::Field {
                field: "walk.epsilon".into(),
                message: format!("expected a positive number or \"auto\", got \"{k}\""),
            })
        }
        Some(EpsilonSpec::Value(v)) => Epsilon::Absolute(v),
    };

    let d = domain.dim();
    let points = match raw.points {
        None => Vec::new(),
        Some(PointsSpec::List(list)) => list
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let field = format!("points[{i}]");
                if c.len() != d {
                    return Err(ConfigError::Field {
                        field,
                        message: format!("expected {d} coordinates, got {}", c.len()),
                    });
                }
                Point::new(c).map_err(|e| ConfigError::field(&field, e))
            })
            .collect::<Result<_, _>>()?,
        Some(PointsSpec::Grid(grid)) => expand_grid(&grid, d)?,
    };

    let bench = {
        let def = BenchGrid::default();
        BenchGrid {
            r_values: raw.bench.r_values.unwrap_or(def.r_values),
            epsilon_fractions: raw.bench.epsilons.unwrap_or(def.epsilon_fractions),
            n: raw.bench.n.unwrap_or(def.n),
        }
    };
    for r in &bench.r_values {
        WalkParams::new(*r, 1.0, 1).map_err(|e| ConfigError::field("bench.r_values", e))?;
    }
    if bench.epsilon_fractions.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(ConfigError::Field {
            field: "bench.epsilons".into(),
            message: "fractions of the diameter must lie in (0,1)".into(),
        });
    }
    if bench.n == 0 {
        return Err(ConfigError::Field {
            field: "bench.n".into(),
            message: "must be at least 1".into(),
        });
    }

    let config = Config {
        domain,
        boundary,
        r: raw.walk.r.unwrap_or(DEFAULT_R),
        epsilon,
        max_steps: raw.walk.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
        n_samples: raw.sampling.n_samples.unwrap_or(DEFAULT_N_SAMPLES),
        seed: raw.sampling.seed.unwrap_or(DEFAULT_SEED),
        mode: raw.mode,
        points,
        output: raw.output,
        bench,
    };
    config.validate()?;
    Ok(config)
}

fn expand_grid(grid: &GridSpec, d: usize) -> Result<Vec<Point>, ConfigError> {
    let bad = |message: String| ConfigError::Field {
        field: "points".into(),
        message,
    };
    if grid.ranges.len() != d || grid.counts.len() != d {
        return Err(bad(format!("grid needs {d} ranges and {d} counts")));
    }
    for (a, ([lo, hi], n)) in grid.ranges.iter().zip(&grid.counts).enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(bad(format!("axis {a}: range must be finite with lo <= hi")));
        }
        if *n == 0 {
            return Err(bad(format!("axis {a}: count must be at least 1")));
        }
    }
    let total: usize = grid.counts.iter().product();
    if total > 10_000_000 {
        return Err(bad(format!("grid has {total} points; limit is 1e7")));
    }
    let axis = |a: usize, i: usize| {
        let [lo, hi] = grid.ranges[a];
        let n = grid.counts[a];
        if n == 1 {
            0.5 * (lo + hi)
        } else if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        points.push(Point::from_vec((0..d).map(|a| axis(a, idx[a])).collect()));
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < grid.counts[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(points)
}
