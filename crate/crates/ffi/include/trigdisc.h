/* Generated by cbindgen; do not edit. */

#ifndef TRIGDISC_H
#define TRIGDISC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  TD_STATUS_NULL_POINTER = 1,
  TD_STATUS_INVALID_ARGUMENT = 2,
  TD_STATUS_DIMENSION_MISMATCH = 3,
  TD_STATUS_SPECTRUM_VIOLATION = 4,
  TD_STATUS_ZERO_POLYNOMIAL = 5,
  TD_STATUS_UNCERTIFIED = 6,
  TD_STATUS_CAP_EXCEEDED = 7,
  TD_STATUS_NUMERICAL = 8,
  TD_STATUS_PARSE = 9,
  TD_STATUS_IO = 10,
  TD_STATUS_PANIC = 11,
} TdStatus;

/**
 * Finite set of integer frequency vectors.
 */
typedef struct TdIndexSet TdIndexSet;

/**
 * Weighted nodes on the torus.
 */
typedef struct TdPointSet TdPointSet;

/**
 * Trigonometric polynomial with complex coefficients.
 */
typedef struct TdPolynomial TdPolynomial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *td_version(void);

/**
 * Copies the last error message of this thread into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * without the terminator, or 0 if there is none.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t td_last_error_message(char *buf, size_t len);

/**
 * Step hyperbolic cross `Q_n` in dimension `d`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TdStatus td_indexset_hyperbolic(uint32_t n, size_t d, struct TdIndexSet **out);

/**
 * Box `Π(N)` with half-widths `n[0..d]`.
 *
 * # Safety
 * `n` must point to `d` values; `out` must be valid.
 */
enum TdStatus td_indexset_box(const uint32_t *n, size_t d, struct TdIndexSet **out);

/**
 * Set from `count` vectors stored row-major in `data` (`count·d` values).
 *
 * # Safety
 * `data` must point to `count·d` values; `out` must be valid.
 */
enum TdStatus td_indexset_from_vectors(size_t d,
                                       const int64_t *data,
                                       size_t count,
                                       struct TdIndexSet **out);

/**
 * Difference set `{m − k : m, k ∈ set}`.
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid.
 */
enum TdStatus td_indexset_difference(const struct TdIndexSet *set, struct TdIndexSet **out);

/**
 * Number of vectors; 0 for a null handle.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
size_t td_indexset_len(const struct TdIndexSet *set);

/**
 * Dimension; 0 for a null handle.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
size_t td_indexset_dim(const struct TdIndexSet *set);

/**
 * Copies vector `i` (canonical order) into `out[0..dim]`.
 *
 * # Safety
 * `set` must be a live handle; `out` must hold `dim` values.
 */
enum TdStatus td_indexset_get(const struct TdIndexSet *set, size_t i, int64_t *out);

/**
 * # Safety
 * `set` must be a handle from this library or null; it is invalid afterwards.
 */
void td_indexset_free(struct TdIndexSet *set);

/**
 * Korobov node set exact for `L₂` on `set`; writes the prime and generator.
 *
 * # Safety
 * `set` must be a live handle; the output pointers must be valid.
 */
enum TdStatus td_pointset_korobov(const struct TdIndexSet *set,
                                  struct TdPointSet **out,
                                  uint64_t *p,
                                  uint64_t *a);

/**
 * Full tensor grid with `2N_j + 1` points per axis.
 *
 * # Safety
 * `n` must point to `d` values; `out` must be valid.
 */
enum TdStatus td_pointset_full_grid(const uint32_t *n, size_t d, struct TdPointSet **out);

/**
 * `m` i.i.d. uniform nodes with equal weights.
 *
 * # Safety
 * `out` must be valid.
 */
enum TdStatus td_pointset_random(size_t m, size_t d, uint64_t seed, struct TdPointSet **out);

/**
 * # Safety
 * `ps` must be a live handle or null.
 */
size_t td_pointset_len(const struct TdPointSet *ps);

/**
 * # Safety
 * `ps` must be a live handle or null.
 */
size_t td_pointset_dim(const struct TdPointSet *ps);

/**
 * Copies node `i` into `x[0..dim]` and its weight into `w`.
 *
 * # Safety
 * `ps` must be a live handle; `x` must hold `dim` values; `w` may be null.
 */
enum TdStatus td_pointset_node(const struct TdPointSet *ps, size_t i, double *x, double *w);

/**
 * # Safety
 * `ps` must be a handle from this library or null.
 */
void td_pointset_free(struct TdPointSet *ps);

/**
 * Extreme eigenvalues of the weighted Gram matrix of `set` at `ps`.
 *
 * # Safety
 * Handles must be live; output pointers must be valid.
 */
enum TdStatus td_certify_l2(const struct TdIndexSet *set,
                            const struct TdPointSet *ps,
                            double *lower,
                            double *upper);

/**
 * `max_{m ∈ lambda} |Σ w_ν e^{i⟨m,ξ^ν⟩} − δ_{m,0}|`.
 *
 * # Safety
 * Handles must be live; `defect` must be valid.
 */
enum TdStatus td_cubature_defect(const struct TdIndexSet *lambda,
                                 const struct TdPointSet *ps,
                                 double *defect);

/**
 * Polynomial with the given coefficients on the canonical order of `set`.
 *
 * # Safety
 * `re` and `im` must hold `len(set)` values; `out` must be valid.
 */
enum TdStatus td_polynomial_from_coeffs(const struct TdIndexSet *set,
                                        const double *re,
                                        const double *im,
                                        struct TdPolynomial **out);

/**
 * Complex Gaussian coefficients on `set`.
 *
 * # Safety
 * `set` must be live; `out` must be valid.
 */
enum TdStatus td_polynomial_random(const struct TdIndexSet *set,
                                   uint64_t seed,
                                   struct TdPolynomial **out);

/**
 * Value at `x[0..dim]`.
 *
 * # Safety
 * `poly` must be live; `x` must hold `dim` values; outputs must be valid.
 */
enum TdStatus td_polynomial_evaluate(const struct TdPolynomial *poly,
                                     const double *x,
                                     double *re,
                                     double *im);

/**
 * `‖t‖_q` for `1 ≤ q < ∞`, or the sup norm for `q = +∞`.
 *
 * # Safety
 * `poly` must be live; `out` must be valid.
 */
enum TdStatus td_polynomial_lq_norm(const struct TdPolynomial *poly, double q, double *out);

/**
 * # Safety
 * `poly` must be a handle from this library or null.
 */
void td_polynomial_free(struct TdPolynomial *poly);

/**
 * `(d + 1 + 2√d)/(d + 1 − 2√d)`.
 */
double td_bss_ratio_bound(double oversample);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIGDISC_H */
