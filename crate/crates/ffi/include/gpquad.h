#ifndef GPQUAD_H
#define GPQUAD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GpqStatus {
  GPQ_STATUS_OK = 0,
  GPQ_STATUS_NULL_POINTER = 1,
  GPQ_STATUS_INVALID_ARGUMENT = 2,
  GPQ_STATUS_RESOURCE_LIMIT = 3,
  GPQ_STATUS_NUMERICAL = 4,
  GPQ_STATUS_CALLBACK_FAILED = 5,
  GPQ_STATUS_PANIC = 6,
} GpqStatus;

typedef enum GpqRule {
  GPQ_RULE_UNSCENTED = 0,
  GPQ_RULE_SPHERICAL_RADIAL = 1,
  GPQ_RULE_GAUSS_HERMITE = 2,
} GpqRule;

// Unit sigma-point set.
typedef struct GpqPoints GpqPoints;

// Moment transform bound to a point set: classical weights or GPQ weights.
typedef struct GpqTransform GpqTransform;

// Integrand callback. Writes `out_dim` values for the point `x` of length
// `in_dim` into `y`; returns 0 on success.
typedef int (*GpqFunction)(const double *x,
                           size_t in_dim,
                           double *y,
                           size_t out_dim,
                           void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty if none.
// The pointer stays valid until the next failing call on the same thread.
const char *gpq_last_error(void);

// Builds a unit point set. `param` is kappa for the unscented rule and is
// ignored otherwise; `order` is used by Gauss-Hermite only.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum GpqStatus gpq_points_new(enum GpqRule rule,
                              size_t dim,
                              double param,
                              size_t order,
                              struct GpqPoints **out);

// # Safety
// `points` must be null or a handle from [`gpq_points_new`] not yet freed.
void gpq_points_free(struct GpqPoints *points);

// # Safety
// `points` must be a live handle.
size_t gpq_points_dim(const struct GpqPoints *points);

// # Safety
// `points` must be a live handle.
size_t gpq_points_len(const struct GpqPoints *points);

// Copies the points (N×D, one point per row) and both weight vectors.
// Any output pointer may be null to skip it.
//
// # Safety
// Non-null outputs must hold N·D, N and N doubles respectively.
enum GpqStatus gpq_points_copy(const struct GpqPoints *points,
                               double *xi,
                               double *mean_weights,
                               double *cov_weights);

// Classical transform using the rule's own weights.
//
// # Safety
// `points` must be a live handle and `out` writable.
enum GpqStatus gpq_transform_new_classical(const struct GpqPoints *points,
                                           struct GpqTransform **out);

// GPQ transform with an RBF kernel. `n_lengthscales` is 1 (isotropic) or
// the point dimension.
//
// # Safety
// `points` must be a live handle, `lengthscales` must hold
// `n_lengthscales` doubles and `out` must be writable.
enum GpqStatus gpq_transform_new_gpq(const struct GpqPoints *points,
                                     double alpha,
                                     const double *lengthscales,
                                     size_t n_lengthscales,
                                     struct GpqTransform **out);

// # Safety
// `transform` must be null or a live handle.
void gpq_transform_free(struct GpqTransform *transform);

// Integral variance of a GPQ transform; 0 for a classical one.
//
// # Safety
// `transform` must be a live handle.
double gpq_transform_integral_variance(const struct GpqTransform *transform);

// Pushes N(mean, cov) of dimension `in_dim` through `f` with `out_dim`
// outputs. Writes the output mean (E), covariance (E×E) and input-output
// cross-covariance (D×E). `cross_cov` may be null.
//
// # Safety
// `mean`/`cov` must hold D and D·D doubles, the outputs E, E·E and D·E.
// `f` is called on the current thread only.
enum GpqStatus gpq_transform_apply(const struct GpqTransform *transform,
                                   GpqFunction f,
                                   void *user_data,
                                   size_t in_dim,
                                   size_t out_dim,
                                   const double *mean,
                                   const double *cov,
                                   double *out_mean,
                                   double *out_cov,
                                   double *cross_cov);

// Symmetrised KL divergence between two Gaussians of dimension `dim`.
//
// # Safety
// Means must hold `dim` doubles, covariances `dim·dim`, `out` one.
enum GpqStatus gpq_skl(size_t dim,
                       const double *mean_a,
                       const double *cov_a,
                       const double *mean_b,
                       const double *cov_b,
                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GPQUAD_H */
