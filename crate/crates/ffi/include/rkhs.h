#ifndef RKHS_H
#define RKHS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum RkhsStatus {
  RKHS_STATUS_OK = 0,
  RKHS_STATUS_NULL_POINTER = 1,
  RKHS_STATUS_INVALID_ARGUMENT = 2,
  RKHS_STATUS_SHAPE = 3,
  RKHS_STATUS_DOMAIN = 4,
  RKHS_STATUS_NUMERICAL = 5,
  RKHS_STATUS_ILL_CONDITIONED = 6,
  RKHS_STATUS_BUDGET = 7,
  RKHS_STATUS_EVALUATION = 8,
  RKHS_STATUS_BUFFER_TOO_SMALL = 9,
  RKHS_STATUS_PANIC = 10,
} RkhsStatus;

/**
 * Which worst-case problem a call refers to.
 */
typedef enum RkhsProblem {
  RKHS_PROBLEM_INTEGRATION = 0,
  RKHS_PROBLEM_APPROXIMATION = 1,
} RkhsProblem;

/**
 * Opaque tensor-product kernel.
 */
typedef struct RkhsKernel RkhsKernel;

/**
 * Opaque quadrature rule.
 */
typedef struct RkhsRule RkhsRule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *rkhs_last_error_message(void);

/**
 * Gaussian kernel with shape parameters `sigma[0..d]`.
 *
 * # Safety
 * `sigma` must point to `d` readable doubles and `out` to a writable handle slot.
 */
enum RkhsStatus rkhs_kernel_gaussian(const double *sigma, size_t d, struct RkhsKernel **out);

/**
 * Hermite kernel with base parameters `beta[0..d]`.
 *
 * # Safety
 * As for [`rkhs_kernel_gaussian`].
 */
enum RkhsStatus rkhs_kernel_hermite(const double *beta, size_t d, struct RkhsKernel **out);

/**
 * # Safety
 * `kernel` must be null or a handle from this library not yet freed.
 */
void rkhs_kernel_free(struct RkhsKernel *kernel);

/**
 * # Safety
 * `kernel` must be a live handle.
 */
size_t rkhs_kernel_dimension(const struct RkhsKernel *kernel);

/**
 * Worst-case error of the zero algorithm.
 *
 * # Safety
 * `kernel` must be a live handle and `out` writable.
 */
enum RkhsStatus rkhs_initial_error(const struct RkhsKernel *kernel,
                                   enum RkhsProblem problem,
                                   double *out);

/**
 * Rule with `n` nodes in `d` dimensions; `nodes` is row-major `n x d`.
 *
 * # Safety
 * `nodes` must hold `n * d` doubles, `weights` `n` doubles, `out` writable.
 */
enum RkhsStatus rkhs_rule_new(const double *nodes,
                              const double *weights,
                              size_t n,
                              size_t d,
                              struct RkhsRule **out);

/**
 * The `n`-point Gauss–Hermite rule for the standard normal distribution.
 *
 * # Safety
 * `out` must be writable.
 */
enum RkhsStatus rkhs_rule_gauss_hermite(size_t n, struct RkhsRule **out);

/**
 * # Safety
 * `rule` must be null or a handle from this library not yet freed.
 */
void rkhs_rule_free(struct RkhsRule *rule);

/**
 * # Safety
 * `rule` must be a live handle.
 */
size_t rkhs_rule_len(const struct RkhsRule *rule);

/**
 * # Safety
 * `rule` must be a live handle.
 */
size_t rkhs_rule_dim(const struct RkhsRule *rule);

/**
 * Copies the row-major node matrix into `buf` (capacity `cap` doubles).
 *
 * # Safety
 * `rule` must be a live handle and `buf` writable for `cap` doubles.
 */
enum RkhsStatus rkhs_rule_nodes(const struct RkhsRule *rule, double *buf, size_t cap);

/**
 * Copies the weights into `buf` (capacity `cap` doubles).
 *
 * # Safety
 * As for [`rkhs_rule_nodes`].
 */
enum RkhsStatus rkhs_rule_weights(const struct RkhsRule *rule, double *buf, size_t cap);

/**
 * Worst-case integration error of `rule` on the space of `kernel`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum RkhsStatus rkhs_wce_integration(const struct RkhsRule *rule,
                                     const struct RkhsKernel *kernel,
                                     double *out);

/**
 * Optimal weights for the nodes of `rule`; the new rule goes to `out` and
 * its squared error to `e2` (may be null).
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum RkhsStatus rkhs_optimal_weights(const struct RkhsRule *rule,
                                     const struct RkhsKernel *kernel,
                                     struct RkhsRule **out,
                                     double *e2);

/**
 * Integration twin of a Gaussian-space rule on the Hermite space matched to
 * `sigma[0..d]`.
 *
 * # Safety
 * `rule` must be live, `sigma` readable for `d` doubles, `out` writable.
 */
enum RkhsStatus rkhs_transfer_to_hermite(const struct RkhsRule *rule,
                                         const double *sigma,
                                         size_t d,
                                         struct RkhsRule **out);

/**
 * Inverse of [`rkhs_transfer_to_hermite`].
 *
 * # Safety
 * As for [`rkhs_transfer_to_hermite`].
 */
enum RkhsStatus rkhs_transfer_to_gaussian(const struct RkhsRule *rule,
                                          const double *sigma,
                                          size_t d,
                                          struct RkhsRule **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RKHS_H */
