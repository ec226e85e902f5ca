#ifndef CYCLEALG_H
#define CYCLEALG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum CycStatus {
  CYC_STATUS_OK = 0,
  CYC_STATUS_NULL_POINTER = 1,
  CYC_STATUS_INVALID_UTF8 = 2,
  CYC_STATUS_PARSE = 3,
  CYC_STATUS_DIMENSION_MISMATCH = 4,
  CYC_STATUS_INDEX_OUT_OF_RANGE = 5,
  CYC_STATUS_NOT_IN_ALGEBRA = 6,
  CYC_STATUS_DEGREE_OVERFLOW = 7,
  CYC_STATUS_NOT_LOCALLY_INNER = 8,
  CYC_STATUS_PRECONDITION = 9,
  CYC_STATUS_ROOT_MISMATCH = 10,
  CYC_STATUS_BUFFER_TOO_SMALL = 11,
  CYC_STATUS_PANIC = 12,
} CycStatus;

/*
 Opaque point derivation presented on generators.
 */
typedef struct CycDerivation CycDerivation;

/*
 Opaque element of the cycle algebra.
 */
typedef struct CycElement CycElement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static nul-terminated string.
 */
const char *cyc_version(void);

/*
 Message for the last failed call on this thread, or null.
 */
const char *cyc_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` is null or was returned by this library and not yet freed.
 */
void cyc_string_free(char *s);

/*
 Parses an element from `{"n", "entries"}` or `{"n", "realized"}` JSON.

 # Safety
 `json` is a nul-terminated string; `out` is valid for one write.
 */
enum CycStatus cyc_element_from_json(const char *json, struct CycElement **out);

/*
 Serializes an element as `{"n", "entries"}` JSON.

 # Safety
 `a` is a live handle; `out` is valid for one write.
 */
enum CycStatus cyc_element_to_json(const struct CycElement *a, char **out);

/*
 # Safety
 `a` is null or a live handle, not used afterwards.
 */
void cyc_element_free(struct CycElement *a);

/*
 Dimension `n`, or 0 for a null handle.

 # Safety
 `a` is null or a live handle.
 */
size_t cyc_element_dim(const struct CycElement *a);

/*
 Idempotent `e_ii` (`edge == false`) or edge generator `Z_i` (`edge == true`),
 with a 1-based index `i`.

 # Safety
 `out` is valid for one write.
 */
enum CycStatus cyc_element_generator(size_t n, size_t i, bool edge, struct CycElement **out);

/*
 `a + b`.

 # Safety
 `a` and `b` are live handles; `out` is valid for one write.
 */
enum CycStatus cyc_element_add(const struct CycElement *a,
                               const struct CycElement *b,
                               struct CycElement **out);

/*
 `a b`, subject to the default degree bound.

 # Safety
 `a` and `b` are live handles; `out` is valid for one write.
 */
enum CycStatus cyc_element_mul(const struct CycElement *a,
                               const struct CycElement *b,
                               struct CycElement **out);

/*
 Evaluates at a representation point given as JSON
 (`{"kind":"lambda","re":..,"im":..}` or `{"kind":"diag0","i":..}`).

 Writes the `d x d` value row-major as interleaved real and imaginary
 parts into `out` (capacity `len` doubles) and `d` into `dim`.

 # Safety
 `a` is a live handle, `point` a nul-terminated string, `out` valid for
 `len` writes and `dim` valid for one write.
 */
enum CycStatus cyc_element_eval(const struct CycElement *a,
                                const char *point,
                                double *out,
                                size_t len,
                                size_t *dim);

/*
 Parses `{"point", "values_e", "values_Z"}` JSON.

 # Safety
 `json` is a nul-terminated string; `out` is valid for one write.
 */
enum CycStatus cyc_derivation_from_json(const char *json, struct CycDerivation **out);

/*
 # Safety
 `d` is a live handle; `out` is valid for one write.
 */
enum CycStatus cyc_derivation_to_json(const struct CycDerivation *d, char **out);

/*
 # Safety
 `d` is null or a live handle, not used afterwards.
 */
void cyc_derivation_free(struct CycDerivation *d);

/*
 Runs the inner-ness decision at tolerance `tol` and writes the verdict
 report as JSON (`"verdict"` is `inner`, `not_inner` or `indeterminate`).
 `is_inner` may be null.

 # Safety
 `d` is a live handle; `out` is valid for one write; `is_inner` is null
 or valid for one write.
 */
enum CycStatus cyc_inner_check(const struct CycDerivation *d,
                               double tol,
                               uint64_t seed,
                               char **out,
                               bool *is_inner);

/*
 Reconstructs the global witness of a derivation given as
 `{"n", "values_e", "values_Z"}` JSON and writes `{"X", "max_residual", "grid"}`.
 Zero for `grid` or `deg_max` selects the defaults.

 # Safety
 `json` is a nul-terminated string; `out` is valid for one write.
 */
enum CycStatus cyc_reconstruct(const char *json,
                               size_t grid,
                               size_t deg_max,
                               double tol,
                               uint64_t seed,
                               char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CYCLEALG_H */
