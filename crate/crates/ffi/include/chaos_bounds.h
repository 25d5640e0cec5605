#ifndef CHAOS_BOUNDS_H
#define CHAOS_BOUNDS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CbSide {
  CB_SIDE_UPPER = 0,
  CB_SIDE_LOWER = 1,
} CbSide;

typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_NULL_POINTER = 1,
  CB_STATUS_INVALID_ARGUMENT = 2,
  CB_STATUS_DIMENSION = 3,
  CB_STATUS_UNSUPPORTED = 4,
  CB_STATUS_PARSE = 5,
  CB_STATUS_NUMERIC = 6,
  CB_STATUS_IO = 7,
  CB_STATUS_PANIC = 8,
} CbStatus;

/**
 * Opaque tensor handle.
 */
typedef struct CbTensor CbTensor;

/**
 * Optimizer and sampling settings; pass NULL for the defaults.
 */
typedef struct CbOptions {
  uint64_t seed;
  size_t restarts;
  size_t saa_samples;
  size_t eval_samples;
  /**
   * Monte-Carlo draws for empirical moments.
   */
  size_t samples;
} CbOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cb_version(void);

struct CbOptions cb_default_options(void);

/**
 * Parses a tensor document `{"d","n","m","space","values"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CbStatus cb_tensor_from_json(const char *json, struct CbTensor **out);

/**
 * Builds a tensor with values in weighted `L_q` of dimension `m`. `values`
 * holds `n^d * m` entries, row-major with the value axis innermost.
 *
 * # Safety
 * `values` must point to `n^d * m` doubles, `weights` to `m` doubles.
 */
enum CbStatus cb_tensor_new_lq(size_t d,
                               size_t n,
                               size_t m,
                               const double *values,
                               double q,
                               const double *weights,
                               struct CbTensor **out);

/**
 * # Safety
 * `t` must come from this library and not have been freed; NULL is ignored.
 */
void cb_tensor_free(struct CbTensor *t);

/**
 * Order `d`, or 0 for NULL.
 *
 * # Safety
 * `t` must be a live handle or NULL.
 */
size_t cb_tensor_order(const struct CbTensor *t);

/**
 * Index range `n`, or 0 for NULL.
 *
 * # Safety
 * `t` must be a live handle or NULL.
 */
size_t cb_tensor_dim(const struct CbTensor *t);

/**
 * `||A||_{P'|P}` for a pair written `P'|P`, e.g. `{1}|{2,3}`.
 *
 * # Safety
 * Pointers must be valid; `opts` may be NULL, `stderr_out` may be NULL.
 */
enum CbStatus cb_mixed_norm(const struct CbTensor *t,
                            const char *pair,
                            const struct CbOptions *opts,
                            double *value_out,
                            double *stderr_out);

/**
 * Structural sum of the upper or lower moment bound at order `p`.
 *
 * # Safety
 * Pointers must be valid; `opts` may be NULL.
 */
enum CbStatus cb_structural_sum(const struct CbTensor *t,
                                double p,
                                enum CbSide side,
                                const struct CbOptions *opts,
                                double *out);

/**
 * The full bound report (terms, sum, constants, optimizer) as JSON. Free
 * the string with `cb_string_free`.
 *
 * # Safety
 * Pointers must be valid; `opts` may be NULL.
 */
enum CbStatus cb_bound_report_json(const struct CbTensor *t,
                                   double p,
                                   enum CbSide side,
                                   const struct CbOptions *opts,
                                   char **out);

/**
 * Upper or lower tail exponent at level `level`.
 *
 * # Safety
 * Pointers must be valid; `opts` may be NULL.
 */
enum CbStatus cb_tail_exponent(const struct CbTensor *t,
                               double level,
                               enum CbSide side,
                               const struct CbOptions *opts,
                               double *out);

/**
 * `(E ||S'||^p)^{1/p}` of the decoupled chaos by sampling.
 *
 * # Safety
 * Pointers must be valid; `opts` may be NULL, `stderr_out` may be NULL.
 */
enum CbStatus cb_empirical_moment(const struct CbTensor *t,
                                  double p,
                                  const struct CbOptions *opts,
                                  double *value_out,
                                  double *stderr_out);

/**
 * # Safety
 * `s` must come from this library and not have been freed; NULL is ignored.
 */
void cb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAOS_BOUNDS_H */
