#ifndef SKEWINFO_H
#define SKEWINFO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SKEWINFO_DIRECTION_Z_TO_Y 0

#define SKEWINFO_DIRECTION_Y_TO_Z 1

/**
 * Result codes shared by all functions.
 */
typedef enum SkewinfoStatus {
  SKEWINFO_STATUS_OK = 0,
  SKEWINFO_STATUS_NULL_POINTER = 1,
  /**
   * Invalid parameters, dimensions, or unparsable input.
   */
  SKEWINFO_STATUS_INVALID_INPUT = 2,
  /**
   * A numerical routine failed to converge.
   */
  SKEWINFO_STATUS_NUMERICAL = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  SKEWINFO_STATUS_PANIC = 4,
} SkewinfoStatus;

/**
 * Opaque multivariate log-skew-normal handle.
 */
typedef struct SkewinfoLsn SkewinfoLsn;

/**
 * Opaque distribution handle.
 */
typedef struct SkewinfoSpec SkewinfoSpec;

/**
 * A Monte Carlo estimate in nats.
 */
typedef struct SkewinfoEstimate {
  double value;
  double std_error;
  double closed_form_part;
  double mc_part;
  double bias_bound;
  uint64_t n_samples;
} SkewinfoEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *skewinfo_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *skewinfo_version(void);

/**
 * Parses a JSON distribution description. Relative CSV paths are
 * resolved against the current directory.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SkewinfoStatus skewinfo_spec_from_json(const char *json, struct SkewinfoSpec **out);

/**
 * Loads a JSON distribution file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SkewinfoStatus skewinfo_spec_load(const char *path, struct SkewinfoSpec **out);

/**
 * Univariate family. `family`: 0 Normal, 1 Log-Normal, 2 Skew-Normal,
 * 3 Log-Skew-Normal. `sigma` is the scale; `alpha` is ignored for the
 * normal kernels.
 *
 * # Safety
 * `out` must be writable.
 */
enum SkewinfoStatus skewinfo_spec_univariate(int family,
                                             double mu,
                                             double sigma,
                                             double alpha,
                                             struct SkewinfoSpec **out);

/**
 * CFUSN (`log_family == 0`) or LCFUSN law. `mu` has `n` entries, `sigma`
 * is `n x n` and `delta` is `n x m`, both row-major.
 *
 * # Safety
 * Pointers must reference arrays of the stated sizes; `out` must be
 * writable.
 */
enum SkewinfoStatus skewinfo_spec_cfusn(size_t n,
                                        size_t m,
                                        const double *mu,
                                        const double *sigma,
                                        const double *delta,
                                        int log_family,
                                        struct SkewinfoSpec **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `spec` must be NULL or a handle from this library not yet freed.
 */
void skewinfo_spec_free(struct SkewinfoSpec *spec);

/**
 * Dimension `n` and skewing dimension `m` of a distribution.
 *
 * # Safety
 * `spec` must be a live handle; `n` and `m` writable.
 */
enum SkewinfoStatus skewinfo_spec_dims(const struct SkewinfoSpec *spec, size_t *n, size_t *m);

/**
 * Natural log of the density at `x` (length `len`).
 *
 * # Safety
 * `spec` must be a live handle, `x` must hold `len` doubles, `out` writable.
 */
enum SkewinfoStatus skewinfo_log_pdf(const struct SkewinfoSpec *spec,
                                     const double *x,
                                     size_t len,
                                     double *out);

/**
 * Shannon entropy in nats: exact for normal kernels, Monte Carlo with
 * `n_samples` draws otherwise.
 *
 * # Safety
 * `spec` must be a live handle; `out` writable.
 */
enum SkewinfoStatus skewinfo_entropy(const struct SkewinfoSpec *spec,
                                     uint64_t seed,
                                     size_t n_samples,
                                     struct SkewinfoEstimate *out);

/**
 * Entropy by deterministic quadrature (dimension 1 or 2).
 *
 * # Safety
 * `spec` must be a live handle; `out` writable.
 */
enum SkewinfoStatus skewinfo_entropy_quadrature(const struct SkewinfoSpec *spec, double *out);

/**
 * Mutual information between the first `n1` coordinates and the rest of
 * a canonical CFUSN / LCFUSN vector.
 *
 * # Safety
 * `spec` must be a live handle; `out` writable.
 */
enum SkewinfoStatus skewinfo_mutual_information(const struct SkewinfoSpec *spec,
                                                size_t n1,
                                                uint64_t seed,
                                                size_t n_samples,
                                                struct SkewinfoEstimate *out);

/**
 * Multivariate LSN law; `sigma` is `n x n` row-major.
 *
 * # Safety
 * Pointers must reference arrays of the stated sizes; `out` writable.
 */
enum SkewinfoStatus skewinfo_lsn_new(size_t n,
                                     const double *mu,
                                     const double *sigma,
                                     const double *alpha,
                                     struct SkewinfoLsn **out);

/**
 * Releases an LSN handle. NULL is ignored.
 *
 * # Safety
 * `lsn` must be NULL or a handle from this library not yet freed.
 */
void skewinfo_lsn_free(struct SkewinfoLsn *lsn);

/**
 * Divergence between an LCFUSN law and an LSN law sharing `(mu, Sigma)`.
 * `direction` is `SKEWINFO_DIRECTION_Z_TO_Y` for `D(LCFUSN || LSN)` or
 * `SKEWINFO_DIRECTION_Y_TO_Z` for the reverse.
 *
 * # Safety
 * `spec` and `lsn` must be live handles; `out` writable.
 */
enum SkewinfoStatus skewinfo_kl(const struct SkewinfoSpec *spec,
                                const struct SkewinfoLsn *lsn,
                                int direction,
                                uint64_t seed,
                                size_t n_samples,
                                struct SkewinfoEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEWINFO_H */
