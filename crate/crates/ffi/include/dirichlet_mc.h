/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef DIRICHLET_MC_H
#define DIRICHLET_MC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum DmcStatus {
  DMC_STATUS_OK = 0,
  DMC_STATUS_NULL_POINTER = 1,
  DMC_STATUS_INVALID_ARGUMENT = 2,
  DMC_STATUS_DIMENSION_MISMATCH = 3,
  DMC_STATUS_NOT_INTERIOR = 4,
  DMC_STATUS_UNSUPPORTED = 5,
  DMC_STATUS_PARSE_ERROR = 6,
  DMC_STATUS_RUNTIME_ERROR = 7,
  DMC_STATUS_PANIC = 8,
} DmcStatus;

/*
 Opaque boundary-data handle, bound to the domain it was validated against.
 */
typedef struct DmcBoundary DmcBoundary;

/*
 Opaque domain handle.
 */
typedef struct DmcDomain DmcDomain;

/*
 Walk parameters: contraction factor in (0,1), stopping shell width and step cap.
 */
typedef struct DmcWalkParams {
  double r;
  double epsilon;
  uint64_t max_steps;
} DmcWalkParams;

/*
 Monte Carlo estimate of the solution at one point.
 */
typedef struct DmcEstimate {
  double mean;
  /*
   Standard error of the mean.
   */
  double std_error;
  uint64_t n_samples;
  double truncation_fraction;
  double mean_steps;
  double sample_min;
  double sample_max;
} DmcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the
 next failing call on the same thread.
 */
const char *dmc_last_error_message(void);

/*
 Static description of a status code.
 */
const char *dmc_status_str(enum DmcStatus status);

/*
 Library version as a static string.
 */
const char *dmc_version(void);

/*
 Builds a domain from a JSON object such as
 `{"type":"ball","center":[0,0],"radius":1}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DmcStatus dmc_domain_from_json(const char *json, struct DmcDomain **out);

/*
 Releases a domain. NULL is ignored.

 # Safety
 `domain` must come from [`dmc_domain_from_json`] and not be freed twice.
 */
void dmc_domain_free(struct DmcDomain *domain);

/*
 Spatial dimension, or 0 for NULL.

 # Safety
 `domain` must be NULL or a live handle.
 */
size_t dmc_domain_dim(const struct DmcDomain *domain);

/*
 # Safety
 `domain` must be a live handle; `out` must be writable.
 */
enum DmcStatus dmc_domain_diameter(const struct DmcDomain *domain, double *out);

/*
 Open-set membership.

 # Safety
 `domain` must be a live handle; `x` must hold `dim` doubles; `out` must be writable.
 */
enum DmcStatus dmc_domain_contains(const struct DmcDomain *domain,
                                   const double *x,
                                   size_t dim,
                                   bool *out);

/*
 Distance from an interior point to the boundary.

 # Safety
 As for [`dmc_domain_contains`].
 */
enum DmcStatus dmc_domain_distance(const struct DmcDomain *domain,
                                   const double *x,
                                   size_t dim,
                                   double *out);

/*
 Nearest boundary point of an interior point, written to `out[0..dim]`.

 # Safety
 `x` and `out` must each hold `dim` doubles.
 */
enum DmcStatus dmc_domain_project(const struct DmcDomain *domain,
                                  const double *x,
                                  size_t dim,
                                  double *out);

/*
 Builds boundary data from JSON (e.g. `{"type":"coordinate","index":0}`)
 and checks it is admissible on `domain`.

 # Safety
 `json` must be NUL-terminated; `domain` a live handle; `out` writable.
 */
enum DmcStatus dmc_boundary_from_json(const char *json,
                                      const struct DmcDomain *domain,
                                      struct DmcBoundary **out);

/*
 Releases boundary data. NULL is ignored.

 # Safety
 `boundary` must come from [`dmc_boundary_from_json`] and not be freed twice.
 */
void dmc_boundary_free(struct DmcBoundary *boundary);

/*
 Boundary data at a point of the boundary.

 # Safety
 Handles must be live; `x` must hold `dim` doubles; `out` writable.
 */
enum DmcStatus dmc_boundary_eval(const struct DmcBoundary *boundary,
                                 const struct DmcDomain *domain,
                                 const double *x,
                                 size_t dim,
                                 double *out);

/*
 Default walk parameters for `domain`: r = 0.5, epsilon = 1e-4 x diameter,
 max_steps = 100000.

 # Safety
 `domain` must be a live handle; `out` writable.
 */
enum DmcStatus dmc_walk_params_default(const struct DmcDomain *domain, struct DmcWalkParams *out);

/*
 Estimates the harmonic extension of the boundary data at interior `x`
 from `n` walks. Results depend only on the inputs and `seed`.

 # Safety
 Handles must be live; `x` must hold `dim` doubles; `params` readable; `out` writable.
 */
enum DmcStatus dmc_estimate_point(const struct DmcDomain *domain,
                                  const struct DmcBoundary *boundary,
                                  const double *x,
                                  size_t dim,
                                  const struct DmcWalkParams *params,
                                  uint64_t n,
                                  uint64_t seed,
                                  struct DmcEstimate *out);

/*
 First uniform direction on the unit sphere of R^dim from stream `index` of `seed`.

 # Safety
 `out` must hold `dim` doubles.
 */
enum DmcStatus dmc_sample_unit_sphere(uint64_t seed, uint64_t index, size_t dim, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRICHLET_MC_H */
