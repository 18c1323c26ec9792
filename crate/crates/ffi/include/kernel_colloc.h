#ifndef KERNEL_COLLOC_H
#define KERNEL_COLLOC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum KcStatus {
  KC_STATUS_OK = 0,
  KC_STATUS_NULL_POINTER = 1,
  KC_STATUS_INVALID_ARGUMENT = 2,
  KC_STATUS_DIMENSION_MISMATCH = 3,
  KC_STATUS_UNSUPPORTED = 4,
  KC_STATUS_NUMERICAL = 5,
  KC_STATUS_IO = 6,
  KC_STATUS_PANIC = 7,
} KcStatus;

typedef enum KcFamily {
  KC_FAMILY_GAUSSIAN = 0,
  KC_FAMILY_MATERN = 1,
  KC_FAMILY_INVERSE_QUADRATIC = 2,
} KcFamily;

typedef enum KcVariant {
  KC_VARIANT_LTO = 0,
  KC_VARIANT_GN_ELIMINATE = 1,
  KC_VARIANT_GN_RELAXED = 2,
} KcVariant;

/**
 * Opaque kernel handle.
 */
typedef struct KcKernel KcKernel;

/**
 * Opaque problem handle.
 */
typedef struct KcProblem KcProblem;

/**
 * Opaque solution handle.
 */
typedef struct KcSolution KcSolution;

/**
 * Solver settings; start from [`kc_solver_options_default`].
 */
typedef struct KcSolverOptions {
  enum KcVariant variant;
  /**
   * Relaxation parameter of `GnRelaxed`.
   */
  double beta_relax;
  double nugget;
  size_t max_iters;
  /**
   * `0` runs all `max_iters` iterations.
   */
  double convergence_tol;
} KcSolverOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message of this thread, without the
 * terminating NUL; `0` if the last call succeeded.
 */
size_t kc_last_error_length(void);

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `len − 1` bytes). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t kc_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kc_version(void);

/**
 * Isotropic kernel. `nu` is read only for `Matern` and must be a half
 * integer in `{1/2, …, 9/2}`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum KcStatus kc_kernel_new(enum KcFamily family,
                            double nu,
                            size_t dim,
                            double lengthscale,
                            struct KcKernel **out);

/**
 * # Safety
 * `k` must be null or a handle from [`kc_kernel_new`] not yet freed.
 */
void kc_kernel_free(struct KcKernel *k);

/**
 * `k(s, t)` for two points of length `dim`.
 *
 * # Safety
 * `s` and `t` must be valid for `dim` reads, `out` for a write.
 */
enum KcStatus kc_kernel_eval(const struct KcKernel *k,
                             const double *s,
                             const double *t,
                             size_t dim,
                             double *out);

/**
 * Nonlinear elliptic problem `−∇·(A∇u) + u³ = f` on the unit ball.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum KcStatus kc_problem_nonlinear_elliptic(size_t dim, double beta, struct KcProblem **out);

/**
 * Darcy flow with a `tanh` nonlinearity on the unit ball.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum KcStatus kc_problem_darcy_tanh(size_t dim, double beta_tau, struct KcProblem **out);

/**
 * One-dimensional Darcy flow with `p` parameters; points are
 * `(x, θ₀, …, θ_p)`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum KcStatus kc_problem_parametric_darcy(size_t p, double k_decay, struct KcProblem **out);

/**
 * Point dimension of the problem.
 *
 * # Safety
 * `p` must be a live problem handle.
 */
size_t kc_problem_dimension(const struct KcProblem *p);

/**
 * # Safety
 * `p` must be null or a problem handle not yet freed.
 */
void kc_problem_free(struct KcProblem *p);

struct KcSolverOptions kc_solver_options_default(void);

/**
 * Samples `m_interior` and `m_boundary` collocation points with `seed` and
 * solves. `opts` may be null for the defaults.
 *
 * # Safety
 * Handles must be live; `opts` null or valid; `out` valid for a write.
 */
enum KcStatus kc_solve(const struct KcProblem *problem,
                       const struct KcKernel *kernel,
                       size_t m_interior,
                       size_t m_boundary,
                       uint64_t seed,
                       const struct KcSolverOptions *opts,
                       struct KcSolution **out);

/**
 * Writes `u(xᵢ)` for `n` points into `values`.
 *
 * # Safety
 * `points` valid for `n·dim` reads, `values` for `n` writes.
 */
enum KcStatus kc_solution_evaluate(const struct KcSolution *sol,
                                   const double *points_rowmajor,
                                   size_t n,
                                   size_t dim,
                                   double *values);

/**
 * Nugget-regularized RKHS norm of the solution.
 *
 * # Safety
 * `sol` must be live, `out` valid for a write.
 */
enum KcStatus kc_solution_rkhs_norm(const struct KcSolution *sol, double *out);

/**
 * # Safety
 * `s` must be null or a solution handle not yet freed.
 */
void kc_solution_free(struct KcSolution *s);

/**
 * `V(0, 0)` of the log-quadratic HJB problem in dimension `d` by kernel
 * backward-SDE steps.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum KcStatus kc_hjb_value(size_t d,
                           size_t n_paths,
                           size_t n_steps,
                           double t_final,
                           double sigma,
                           double nugget,
                           uint64_t seed,
                           double *out);

/**
 * Monte Carlo fill distance of `n` points in `[0,1]^dim`.
 *
 * # Safety
 * `points` valid for `n·dim` reads, `out` for a write.
 */
enum KcStatus kc_fill_distance_unit_cube(const double *points_rowmajor,
                                         size_t n,
                                         size_t dim,
                                         size_t probes,
                                         uint64_t seed,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KERNEL_COLLOC_H */
