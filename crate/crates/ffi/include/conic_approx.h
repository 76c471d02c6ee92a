#ifndef CONIC_APPROX_H
#define CONIC_APPROX_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CaCutoff {
  CA_CUTOFF_EXPONENTIAL_BUMP = 0,
  CA_CUTOFF_RAISED_COSINE = 1,
} CaCutoff;

typedef enum CaKernelBackend {
  CA_KERNEL_BACKEND_BASIS_SUM = 0,
  CA_KERNEL_BACKEND_ADDITION_FORMULA = 1,
} CaKernelBackend;

/**
 * Outcome of [`ca_run`], matching the CLI exit codes.
 */
typedef enum CaOutcome {
  CA_OUTCOME_PASS = 0,
  CA_OUTCOME_CHECK_FAILURE = 1,
  CA_OUTCOME_NUMERICAL_FAILURE = 3,
} CaOutcome;

typedef enum CaStatus {
  CA_STATUS_OK = 0,
  CA_STATUS_NULL_POINTER = 1,
  CA_STATUS_PARAMETER_DOMAIN = 2,
  CA_STATUS_DOMAIN = 3,
  CA_STATUS_INDEX = 4,
  CA_STATUS_DIMENSION = 5,
  CA_STATUS_CONFIGURATION = 6,
  CA_STATUS_DEGENERATE_INPUT = 7,
  CA_STATUS_CAPABILITY = 8,
  CA_STATUS_NUMERICAL_FAILURE = 9,
  CA_STATUS_USAGE = 10,
  CA_STATUS_INVALID_UTF8 = 11,
  CA_STATUS_PANIC = 12,
} CaStatus;

/**
 * A polynomial on the conic surface.
 */
typedef struct CaSurfaceExpansion CaSurfaceExpansion;

/**
 * Reproducing kernel of `V_n` on the conic surface.
 */
typedef struct CaSurfaceKernel CaSurfaceKernel;

/**
 * Near-best operator `L_n` on a fixed sampling grid.
 */
typedef struct CaSurfaceOperator CaSurfaceOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ca_last_error_message(char *buf, size_t len);

/**
 * `P_n^{(α,β)}(x)`.
 *
 * # Safety
 * `result` must be valid for one write.
 */
enum CaStatus ca_jacobi_eval(double alpha, double beta, size_t n, double x, double *result);

/**
 * Gauss-Jacobi nodes and weights on `[-1,1]`.
 *
 * # Safety
 * `nodes` and `weights` must be valid for `num_nodes` writes each.
 */
enum CaStatus ca_gauss_jacobi(double alpha,
                              double beta,
                              size_t num_nodes,
                              double *nodes,
                              double *weights);

double ca_cutoff_eval(enum CaCutoff cutoff, double t);

/**
 * # Safety
 * `kernel` must be valid for one write.
 */
enum CaStatus ca_surface_kernel_new(size_t d,
                                    double gamma,
                                    size_t n,
                                    enum CaCutoff cutoff,
                                    enum CaKernelBackend backend,
                                    struct CaSurfaceKernel **kernel);

/**
 * `L_n((t_a ξ_a, t_a), (t_b ξ_b, t_b))`; `xi_a` and `xi_b` hold `d` coordinates.
 *
 * # Safety
 * `kernel` must come from [`ca_surface_kernel_new`]; `xi_a`, `xi_b` must
 * be valid for `d` reads and `result` for one write.
 */
enum CaStatus ca_surface_kernel_eval(const struct CaSurfaceKernel *kernel,
                                     const double *xi_a,
                                     double t_a,
                                     const double *xi_b,
                                     double t_b,
                                     double *result);

/**
 * # Safety
 * `kernel` must be null or come from [`ca_surface_kernel_new`], and is
 * invalid afterwards.
 */
void ca_surface_kernel_free(struct CaSurfaceKernel *kernel);

/**
 * # Safety
 * `op` must be valid for one write.
 */
enum CaStatus ca_surface_operator_new(size_t d,
                                      double gamma,
                                      size_t n,
                                      enum CaCutoff cutoff,
                                      struct CaSurfaceOperator **op);

/**
 * Number of sampling points of the operator grid, or 0 for a null handle.
 *
 * # Safety
 * `op` must be null or come from [`ca_surface_operator_new`].
 */
size_t ca_surface_operator_grid_len(const struct CaSurfaceOperator *op);

/**
 * The grid in sampling order: `t[k]` and `xi[k*d .. (k+1)*d]`.
 *
 * # Safety
 * `op` must come from [`ca_surface_operator_new`]; `t` must be valid for
 * `grid_len` writes and `xi` for `grid_len * d` writes.
 */
enum CaStatus ca_surface_operator_grid(const struct CaSurfaceOperator *op, double *t, double *xi);

/**
 * `L_n f` from `f` sampled on the operator grid.
 *
 * # Safety
 * `op` must come from [`ca_surface_operator_new`]; `values` must be valid
 * for `len` reads and `expansion` for one write.
 */
enum CaStatus ca_surface_operator_apply(const struct CaSurfaceOperator *op,
                                        const double *values,
                                        size_t len,
                                        struct CaSurfaceExpansion **expansion);

/**
 * # Safety
 * `op` must be null or come from [`ca_surface_operator_new`], and is
 * invalid afterwards.
 */
void ca_surface_operator_free(struct CaSurfaceOperator *op);

/**
 * Value at `(tξ, t)`; `xi` holds `d` coordinates.
 *
 * # Safety
 * `expansion` must come from [`ca_surface_operator_apply`]; `xi` must be
 * valid for `d` reads and `result` for one write.
 */
enum CaStatus ca_surface_expansion_eval(const struct CaSurfaceExpansion *expansion,
                                        const double *xi,
                                        double t,
                                        double *result);

/**
 * # Safety
 * `expansion` must be null or come from [`ca_surface_operator_apply`],
 * and is invalid afterwards.
 */
void ca_surface_expansion_free(struct CaSurfaceExpansion *expansion);

/**
 * Runs a harness command (`"verify"`, `"convergence"`, ...) and writes its
 * report and CSV tables into `out_dir`. A null `config_json` selects the
 * default configuration.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `outcome` must be valid
 * for one write.
 */
enum CaStatus ca_run(const char *command,
                     const char *config_json,
                     const char *out_dir,
                     enum CaOutcome *outcome);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONIC_APPROX_H */
