//! C ABI for `dirichlet-mc`.
//!
//! Domains and boundary data are opaque handles built from the same JSON
//! objects used in run configs (`{"type": "ball", ...}`) and released with the
//! matching `*_free` function. Every fallible call returns a [`DmcStatus`];
//! on failure, [`dmc_last_error_message`] describes the error for the calling
//! thread. Panics never cross the boundary.
//!
//! Point arguments are `(const double *x, size_t dim)` pairs; `dim` must equal
//! the domain dimension.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dirichlet_mc::config::{BoundarySpec, DomainSpec};
use dirichlet_mc::{derive_stream, estimate_point, sample_unit_sphere, BoundaryFunction, Domain, Error, Point, WalkParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotInterior = 4,
    Unsupported = 5,
    ParseError = 6,
    RuntimeError = 7,
    Panic = 8,
}

/// Opaque domain handle.
pub struct DmcDomain(Domain);

/// Opaque boundary-data handle, bound to the domain it was validated against.
pub struct DmcBoundary(BoundaryFunction);

/// Walk parameters: contraction factor in (0,1), stopping shell width and step cap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmcWalkParams {
    pub r: f64,
    pub epsilon: f64,
    pub max_steps: u64,
}

/// Monte Carlo estimate of the solution at one point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DmcEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub n_samples: u64,
    pub truncation_fraction: f64,
    pub mean_steps: f64,
    pub sample_min: f64,
    pub sample_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(DmcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch { .. } => DmcStatus::DimensionMismatch,
            Error::NotInterior(_) | Error::NotOnBoundary { .. } => DmcStatus::NotInterior,
            Error::InvalidDomain(_) | Error::InvalidParameter { .. } | Error::BoundaryFunction(_) => {
                DmcStatus::InvalidArgument
            }
            Error::Unsupported(_) => DmcStatus::Unsupported,
            Error::NonConvergence(_) => DmcStatus::RuntimeError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DmcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> DmcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DmcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            DmcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(DmcStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn point_arg(domain: &Domain, x: *const f64, dim: usize) -> Result<Point, Failure> {
    if x.is_null() {
        return Err(null("x"));
    }
    if dim != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: dim,
        }
        .into());
    }
    Ok(Point::new(std::slice::from_raw_parts(x, dim).to_vec())?)
}

fn parse_error(what: &str) -> impl FnOnce(serde_json::Error) -> Failure + '_ {
    move |e| Failure(DmcStatus::ParseError, format!("{what}: {e}"))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dmc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn dmc_status_str(status: DmcStatus) -> *const c_char {
    let s: &'static CStr = match status {
        DmcStatus::Ok => c"ok",
        DmcStatus::NullPointer => c"null pointer argument",
        DmcStatus::InvalidArgument => c"invalid argument",
        DmcStatus::DimensionMismatch => c"dimension mismatch",
        DmcStatus::NotInterior => c"point not in the required region",
        DmcStatus::Unsupported => c"unsupported case",
        DmcStatus::ParseError => c"JSON parse error",
        DmcStatus::RuntimeError => c"runtime error",
        DmcStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dmc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a domain from a JSON object such as
/// `{"type":"ball","center":[0,0],"radius":1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmc_domain_from_json(json: *const c_char, out: *mut *mut DmcDomain) -> DmcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let spec: DomainSpec = serde_json::from_str(str_arg(json, "json")?).map_err(parse_error("domain"))?;
        *out = Box::into_raw(Box::new(DmcDomain(spec.build()?)));
        Ok(())
    })
}

/// Releases a domain. NULL is ignored.
///
/// # Safety
/// `domain` must come from [`dmc_domain_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dmc_domain_free(domain: *mut DmcDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Spatial dimension, or 0 for NULL.
///
/// # Safety
/// `domain` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dmc_domain_dim(domain: *const DmcDomain) -> usize {
    domain.as_ref().map_or(0, |d| d.0.dim())
}

/// # Safety
/// `domain` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmc_domain_diameter(domain: *const DmcDomain, out: *mut f64) -> DmcStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(domain, "domain")?.0.diameter();
        Ok(())
    })
}

/// Open-set membership.
///
/// # Safety
/// `domain` must be a live handle; `x` must hold `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmc_domain_contains(
    domain: *const DmcDomain,
    x: *const f64,
    dim: usize,
    out: *mut bool,
) -> DmcStatus {
    guard(|| {
        let d = &ref_arg(domain, "domain")?.0;
        let p = point_arg(d, x, dim)?;
        *out_arg(out, "out")? = d.contains(&p)?;
        Ok(())
    })
}

/// Distance from an interior point to the boundary.
///
/// # Safety
/// As for [`dmc_domain_contains`].
#[no_mangle]
pub unsafe extern "C" fn dmc_domain_distance(
    domain: *const DmcDomain,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> DmcStatus {
    guard(|| {
        let d = &ref_arg(domain, "domain")?.0;
        let p = point_arg(d, x, dim)?;
        *out_arg(out, "out")? = d.distance_to_boundary(&p)?;
        Ok(())
    })
}

/// Nearest boundary point of an interior point, written to `out[0..dim]`.
///
/// # Safety
/// `x` and `out` must each hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn dmc_domain_project(
    domain: *const DmcDomain,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> DmcStatus {
    guard(|| {
        let d = &ref_arg(domain, "domain")?.0;
        let p = point_arg(d, x, dim)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let y = d.project_to_boundary(&p)?;
        std::slice::from_raw_parts_mut(out, dim).copy_from_slice(y.coords());
        Ok(())
    })
}

/// Builds boundary data from JSON (e.g. `{"type":"coordinate","index":0}`)
/// and checks it is admissible on `domain`.
///
/// # Safety
/// `json` must be NUL-terminated; `domain` a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dmc_boundary_from_json(
    json: *const c_char,
    domain: *const DmcDomain,
    out: *mut *mut DmcBoundary,
) -> DmcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let d = &ref_arg(domain, "domain")?.0;
        let spec: BoundarySpec = serde_json::from_str(str_arg(json, "json")?).map_err(parse_error("boundary"))?;
        let f = spec.build()?;
        f.validate_for(d)?;
        *out = Box::into_raw(Box::new(DmcBoundary(f)));
        Ok(())
    })
}

/// Releases boundary data. NULL is ignored.
///
/// # Safety
/// `boundary` must come from [`dmc_boundary_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dmc_boundary_free(boundary: *mut DmcBoundary) {
    if !boundary.is_null() {
        drop(Box::from_raw(boundary));
    }
}

/// Boundary data at a point of the boundary.
///
/// # Safety
/// Handles must be live; `x` must hold `dim` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dmc_boundary_eval(
    boundary: *const DmcBoundary,
    domain: *const DmcDomain,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> DmcStatus {
    guard(|| {
        let f = &ref_arg(boundary, "boundary")?.0;
        let d = &ref_arg(domain, "domain")?.0;
        let p = point_arg(d, x, dim)?;
        *out_arg(out, "out")? = f.eval_boundary(d, &p)?;
        Ok(())
    })
}

/// Default walk parameters for `domain`: r = 0.5, epsilon = 1e-4 x diameter,
/// max_steps = 100000.
///
/// # Safety
/// `domain` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dmc_walk_params_default(domain: *const DmcDomain, out: *mut DmcWalkParams) -> DmcStatus {
    guard(|| {
        let p = WalkParams::for_domain(&ref_arg(domain, "domain")?.0);
        *out_arg(out, "out")? = DmcWalkParams {
            r: p.r(),
            epsilon: p.epsilon(),
            max_steps: p.max_steps(),
        };
        Ok(())
    })
}

/// Estimates the harmonic extension of the boundary data at interior `x`
/// from `n` walks. Results depend only on the inputs and `seed`.
///
/// # Safety
/// Handles must be live; `x` must hold `dim` doubles; `params` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dmc_estimate_point(
    domain: *const DmcDomain,
    boundary: *const DmcBoundary,
    x: *const f64,
    dim: usize,
    params: *const DmcWalkParams,
    n: u64,
    seed: u64,
    out: *mut DmcEstimate,
) -> DmcStatus {
    guard(|| {
        let d = &ref_arg(domain, "domain")?.0;
        let f = &ref_arg(boundary, "boundary")?.0;
        let p = point_arg(d, x, dim)?;
        let raw = ref_arg(params, "params")?;
        let params = WalkParams::new(raw.r, raw.epsilon, raw.max_steps)?;
        let e = estimate_point(d, f, &p, &params, n, seed)?;
        *out_arg(out, "out")? = DmcEstimate {
            mean: e.mean,
            std_error: e.stderr,
            n_samples: e.n_samples,
            truncation_fraction: e.truncation_fraction,
            mean_steps: e.mean_steps,
            sample_min: e.sample_min,
            sample_max: e.sample_max,
        };
        Ok(())
    })
}

/// First uniform direction on the unit sphere of R^dim from stream `index` of `seed`.
///
/// # Safety
/// `out` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn dmc_sample_unit_sphere(seed: u64, index: u64, dim: usize, out: *mut f64) -> DmcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut stream = derive_stream(seed, index);
        let theta = sample_unit_sphere(&mut stream, dim)?;
        std::slice::from_raw_parts_mut(out, dim).copy_from_slice(theta.coords());
        Ok(())
    })
}
