//! Monte Carlo evaluation of `h(v) = E[f(X(∞))]` and consistency checks.
//!
//! Sample `i` of an estimate always uses stream `i` of the root seed. Samples
//! are grouped into fixed-size blocks, each block is accumulated sequentially,
//! and block partials are merged in index order, so the floating-point result
//! does not depend on how many worker threads ran the blocks.

use log::warn;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{Domain, Patch, Point, BOUNDARY_TOL};
use crate::oracle::quadrature::sphere_probe_points;
use crate::oracle::BoundaryFunction;
use crate::sampling::derive_stream;
use crate::stats::RunningStats;
use crate::walk::{position_raw, walk_raw, WalkParams};

/// Samples per block. Fixed: changing it changes the merge tree.
const BLOCK: u64 = 1024;

/// Truncation rate above which an estimate is flagged.
pub const TRUNCATION_WARN_FRACTION: f64 = 0.01;

/// Bias allowance for data of magnitude at most one.
pub const DEFAULT_BIAS_ALLOWANCE: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub point: Point,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub truncation_fraction: f64,
    pub mean_steps: f64,
    /// Smallest and largest sampled boundary value.
    pub sample_min: f64,
    pub sample_max: f64,
}

impl Estimate {
    pub fn flagged(&self) -> bool {
        self.truncation_fraction > TRUNCATION_WARN_FRACTION
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledValue {
    pub label: String,
    pub mean: f64,
    pub stderr: f64,
}

/// Outcome of comparing several estimates of the same quantity.
///
/// `max_discrepancy` and `threshold` come from the comparison with the
/// largest discrepancy-to-threshold ratio, so `pass` holds iff every
/// individual comparison is within its own threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub quantity: String,
    pub values: Vec<LabeledValue>,
    pub max_discrepancy: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ConsistencyReport {
    fn from_comparisons(quantity: String, values: Vec<LabeledValue>, comparisons: &[(f64, f64)]) -> Self {
        let ratio = |(gap, thr): (f64, f64)| {
            if gap == 0.0 {
                0.0
            } else if thr == 0.0 {
                f64::INFINITY
            } else {
                gap / thr
            }
        };
        let (max_discrepancy, threshold) = comparisons
            .iter()
            .copied()
            .fold((0.0, 0.0), |worst, c| if ratio(c) > ratio(worst) { c } else { worst });
        ConsistencyReport {
            quantity,
            values,
            max_discrepancy,
            threshold,
            pass: max_discrepancy <= threshold,
        }
    }
}

/// Common settings of the consistency checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSettings {
    pub params: WalkParams,
    pub n: u64,
    pub seed: u64,
    pub bias_allowance: f64,
}

impl CheckSettings {
    /// Default bias allowance: 0.005 for data bounded by one, scaled by the
    /// data magnitude otherwise.
    pub fn new(domain: &Domain, f: &BoundaryFunction, params: WalkParams, n: u64, seed: u64) -> Self {
        CheckSettings {
            params,
            n,
            seed,
            bias_allowance: default_bias_allowance(domain, f),
        }
    }
}

pub fn default_bias_allowance(domain: &Domain, f: &BoundaryFunction) -> f64 {
    DEFAULT_BIAS_ALLOWANCE * f.magnitude_bound(domain).max(1.0)
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    values: RunningStats,
    steps: u64,
    truncated: u64,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        self.values.merge(&other.values);
        self.steps += other.steps;
        self.truncated += other.truncated;
    }
}

/// Runs `sample(index)` for `index in offset..offset + n` in fixed blocks and
/// merges the block tallies in order.
fn sample_blocks<F>(offset: u64, n: u64, sample: F) -> Result<Tally>
where
    F: Fn(u64) -> Result<(f64, u64, bool)> + Sync,
{
    let n_blocks = n.div_ceil(BLOCK);
    let partials: Vec<Result<Tally>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut t = Tally::default();
            let start = b * BLOCK;
            let end = (start + BLOCK).min(n);
            for i in start..end {
                let (value, steps, truncated) = sample(offset + i)?;
                t.values.push(value);
                t.steps += steps;
                t.truncated += truncated as u64;
            }
            Ok(t)
        })
        .collect();
    let mut total = Tally::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

fn check_inputs(domain: &Domain, f: &BoundaryFunction, params: &WalkParams, n: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "need at least one sample"));
    }
    params.validate_for(domain)?;
    f.validate_complete(domain)
}

fn estimate_indexed(
    domain: &Domain,
    f: &BoundaryFunction,
    v: &Point,
    params: &WalkParams,
    n: u64,
    seed: u64,
    offset: u64,
) -> Result<Estimate> {
    let tally = sample_blocks(offset, n, |i| {
        let mut rng = derive_stream(seed, i);
        let (exit, steps, truncated, _) = walk_raw(domain, v, params, &mut rng, |_, _| {});
        Ok((f.value_raw(domain, &exit)?, steps, truncated))
    })?;
    let est = Estimate {
        point: v.clone(),
        mean: tally.values.mean(),
        stderr: tally.values.stderr(),
        n_samples: n,
        truncation_fraction: tally.truncated as f64 / n as f64,
        mean_steps: tally.steps as f64 / n as f64,
        sample_min: tally.values.min(),
        sample_max: tally.values.max(),
    };
    if est.flagged() {
        warn!(
            "{:.2}% of walks from {:?} hit the step cap ({}); the estimate may be biased",
            100.0 * est.truncation_fraction,
            v.coords(),
            params.max_steps()
        );
    }
    Ok(est)
}

/// Estimates `h(v)` from `n` walks using streams `0..n` of `seed`.
///
/// `v` must be interior; boundary points are handled by [`estimate_grid`].
pub fn estimate_point(
    domain: &Domain,
    f: &BoundaryFunction,
    v: &Point,
    params: &WalkParams,
    n: u64,
    seed: u64,
) -> Result<Estimate> {
    check_inputs(domain, f, params, n)?;
    domain.require_interior(v)?;
    estimate_indexed(domain, f, v, params, n, seed, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Interior(Estimate),
    /// Within 1e-9 of the boundary: the data value at the nearest boundary point.
    Boundary { value: f64 },
    Outside,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub point: Point,
    pub status: PointStatus,
}

/// Evaluates the field at each point; point `k` uses streams
/// `k * n_per_point .. (k + 1) * n_per_point`.
pub fn estimate_grid(
    domain: &Domain,
    f: &BoundaryFunction,
    points: &[Point],
    params: &WalkParams,
    n_per_point: u64,
    seed: u64,
) -> Result<Vec<GridEntry>> {
    if points.is_empty() {
        return Err(invalid("points", "point list is empty"));
    }
    check_inputs(domain, f, params, n_per_point)?;
    points
        .iter()
        .enumerate()
        .map(|(k, x)| {
            domain.check_dim(x.dim())?;
            let status = if domain.boundary_gap_raw(x) <= BOUNDARY_TOL {
                let mut foot = vec![0.0; x.dim()];
                domain.nearest_boundary_raw(x, &mut foot);
                PointStatus::Boundary {
                    value: f.value_raw(domain, &foot)?,
                }
            } else if domain.contains_raw(x) {
                let offset = (k as u64)
                    .checked_mul(n_per_point)
                    .ok_or_else(|| invalid("n", "stream index range overflows 64 bits"))?;
                PointStatus::Interior(estimate_indexed(domain, f, x, params, n_per_point, seed, offset)?)
            } else {
                PointStatus::Outside
            };
            Ok(GridEntry {
                point: x.clone(),
                status,
            })
        })
        .collect()
}

fn combined(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// Estimates `h(v)` for each contraction factor (same seed and streams) and
/// compares every pair within `3 * combined stderr + 2 * bias_allowance`.
pub fn check_r_independence(
    domain: &Domain,
    f: &BoundaryFunction,
    v: &Point,
    r_values: &[f64],
    settings: &CheckSettings,
) -> Result<ConsistencyReport> {
    if r_values.len() < 2 {
        return Err(invalid("r_values", "need at least two contraction factors"));
    }
    let params: Vec<WalkParams> = r_values
        .iter()
        .map(|r| settings.params.with_r(*r))
        .collect::<Result<_>>()?;
    let estimates: Vec<Estimate> = params
        .iter()
        .map(|p| estimate_point(domain, f, v, p, settings.n, settings.seed))
        .collect::<Result<_>>()?;
    let mut comparisons = Vec::new();
    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            let (a, b) = (&estimates[i], &estimates[j]);
            comparisons.push((
                (a.mean - b.mean).abs(),
                3.0 * combined(a.stderr, b.stderr) + 2.0 * settings.bias_allowance,
            ));
        }
    }
    let values = r_values
        .iter()
        .zip(&estimates)
        .map(|(r, e)| LabeledValue {
            label: format!("r={r}"),
            mean: e.mean,
            stderr: e.stderr,
        })
        .collect();
    Ok(ConsistencyReport::from_comparisons(
        "h(v) across contraction factors".into(),
        values,
        &comparisons,
    ))
}

/// Compares the estimate at `x` with the average of estimates at `k` points of
/// the sphere of radius `rho` about `x`.
pub fn check_mean_value(
    domain: &Domain,
    f: &BoundaryFunction,
    x: &Point,
    rho: f64,
    k: usize,
    settings: &CheckSettings,
) -> Result<ConsistencyReport> {
    check_inputs(domain, f, &settings.params, settings.n)?;
    domain.require_interior(x)?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(invalid("rho", "sphere radius must be positive"));
    }
    if domain.distance_raw(x) <= rho {
        return Err(invalid("rho", format!("closed sphere of radius {rho} about {:?} leaves the domain", x.coords())));
    }
    let n = settings.n;
    let center = estimate_indexed(domain, f, x, &settings.params, n, settings.seed, 0)?;
    let probes = sphere_probe_points(x, rho, k)?;
    let mut sum = 0.0;
    let mut var_sum = 0.0;
    for (i, y) in probes.iter().enumerate() {
        let y = Point::from_vec(y.clone());
        let offset = (i as u64 + 1) * n;
        let e = estimate_indexed(domain, f, &y, &settings.params, n, settings.seed, offset)?;
        sum += e.mean;
        var_sum += e.stderr * e.stderr;
    }
    let m = probes.len() as f64;
    let avg = sum / m;
    let avg_stderr = var_sum.sqrt() / m;
    let gap = (center.mean - avg).abs();
    let thr = 3.0 * combined(center.stderr, avg_stderr) + 2.0 * settings.bias_allowance;
    Ok(ConsistencyReport::from_comparisons(
        "mean value property".into(),
        vec![
            LabeledValue {
                label: "center".into(),
                mean: center.mean,
                stderr: center.stderr,
            },
            LabeledValue {
                label: format!("sphere average (k={}, rho={rho})", probes.len()),
                mean: avg,
                stderr: avg_stderr,
            },
        ],
        &[(gap, thr)],
    ))
}

/// Compares estimates at interior `points` with reference values, each within
/// `3 * stderr + bias_allowance + reference_tol`. Point `k` uses streams
/// `k * n .. (k + 1) * n`.
pub fn check_against_reference<F>(
    domain: &Domain,
    f: &BoundaryFunction,
    points: &[Point],
    reference_name: &str,
    reference: F,
    reference_tol: f64,
    settings: &CheckSettings,
) -> Result<ConsistencyReport>
where
    F: Fn(&Point) -> Result<f64>,
{
    if points.is_empty() {
        return Err(invalid("points", "point list is empty"));
    }
    check_inputs(domain, f, &settings.params, settings.n)?;
    let mut values = Vec::with_capacity(2 * points.len());
    let mut comparisons = Vec::with_capacity(points.len());
    for (k, x) in points.iter().enumerate() {
        domain.require_interior(x)?;
        let e = estimate_indexed(domain, f, x, &settings.params, settings.n, settings.seed, k as u64 * settings.n)?;
        let exact = reference(x)?;
        values.push(LabeledValue {
            label: format!("estimate at {:?}", x.coords()),
            mean: e.mean,
            stderr: e.stderr,
        });
        values.push(LabeledValue {
            label: format!("{reference_name} at {:?}", x.coords()),
            mean: exact,
            stderr: 0.0,
        });
        comparisons.push(((e.mean - exact).abs(), 3.0 * e.stderr + settings.bias_allowance + reference_tol));
    }
    Ok(ConsistencyReport::from_comparisons(
        format!("h against {reference_name}"),
        values,
        &comparisons,
    ))
}

/// Compares the empirical mean of `X(m)` over `n` walks (no stopping shell)
/// with the starting point, component by component, within 3 stderr.
pub fn check_coordinate_martingale(
    domain: &Domain,
    v: &Point,
    r: f64,
    n: u64,
    m: u64,
    seed: u64,
) -> Result<ConsistencyReport> {
    if n == 0 {
        return Err(invalid("n", "need at least one sample"));
    }
    if m == 0 {
        return Err(invalid("m", "the walk is indexed from 1"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("r", format!("must lie in the open interval (0,1), got {r}")));
    }
    domain.require_interior(v)?;
    let d = v.dim();
    let mut values = Vec::with_capacity(d);
    let mut comparisons = Vec::with_capacity(d);
    for j in 0..d {
        let tally = sample_blocks(0, n, |i| {
            let mut rng = derive_stream(seed, i);
            let x = position_raw(domain, v, r, m, &mut rng);
            Ok((x[j], m - 1, false))
        })?;
        let (mean, se) = (tally.values.mean(), tally.values.stderr());
        values.push(LabeledValue {
            label: format!("x{j}"),
            mean,
            stderr: se,
        });
        comparisons.push(((mean - v[j]).abs(), 3.0 * se));
    }
    Ok(ConsistencyReport::from_comparisons(
        format!("E[X({m})] = v"),
        values,
        &comparisons,
    ))
}

/// Fraction of `n` walks from `v` whose exit point lies on `patch`.
pub fn exit_fraction(domain: &Domain, v: &Point, params: &WalkParams, n: u64, seed: u64, patch: Patch) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "need at least one sample"));
    }
    params.validate_for(domain)?;
    domain.require_interior(v)?;
    let tally = sample_blocks(0, n, |i| {
        let mut rng = derive_stream(seed, i);
        let (exit, steps, truncated, _) = walk_raw(domain, v, params, &mut rng, |_, _| {});
        let hit = domain.boundary_patch(&exit) == patch;
        Ok((hit as u8 as f64, steps, truncated))
    })?;
    Ok(tally.values.mean())
}

/// Exit step counts of `n` walks from `v`, in stream order.
pub fn step_counts(domain: &Domain, v: &Point, params: &WalkParams, n: u64, seed: u64) -> Result<Vec<(u64, bool)>> {
    params.validate_for(domain)?;
    domain.require_interior(v)?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, i);
            let (_, steps, truncated, _) = walk_raw(domain, v, params, &mut rng, |_, _| {});
            (steps, truncated)
        })
        .collect())
}
