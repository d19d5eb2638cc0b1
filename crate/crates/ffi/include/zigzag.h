#ifndef ZIGZAG_H
#define ZIGZAG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C API.
 */
typedef enum ZzStatus {
  ZZ_STATUS_OK = 0,
  ZZ_STATUS_NULL_POINTER = 1,
  ZZ_STATUS_INVALID_ARGUMENT = 2,
  ZZ_STATUS_INVALID_POTENTIAL = 3,
  ZZ_STATUS_DIRICHLET_POLE = 4,
  ZZ_STATUS_COMPUTATION = 5,
  ZZ_STATUS_OUT_OF_RANGE = 6,
  ZZ_STATUS_PANIC = 7,
} ZzStatus;

/**
 * Opaque band-structure handle.
 */
typedef struct ZzBands ZzBands;

/**
 * Opaque potential handle.
 */
typedef struct ZzPotential ZzPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `len`). Returns the full message length in bytes, 0 if there is none.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t zz_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *zz_version(void);

/**
 * Parses a potential from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ZzStatus zz_potential_from_json(const char *json, struct ZzPotential **out);

/**
 * The constant potential `q = c`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ZzStatus zz_potential_constant(double c, struct ZzPotential **out);

/**
 * # Safety
 * `p` must come from a `zz_potential_*` constructor or be null.
 */
void zz_potential_free(struct ZzPotential *p);

/**
 * `Δ₀(λ)` at complex `λ = re + i·im`.
 *
 * # Safety
 * `p` must be a live handle; the output pointers must be writable.
 */
enum ZzStatus zz_delta0(const struct ZzPotential *p,
                        double re,
                        double im,
                        double *out_re,
                        double *out_im);

/**
 * Sector monodromy `M_k(λ)` as eight doubles: row-major entries, each as
 * `(re, im)`.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable for eight doubles.
 */
enum ZzStatus zz_monodromy_k(const struct ZzPotential *p,
                             double re,
                             double im,
                             size_t k,
                             size_t n_chains,
                             double *out);

/**
 * Assembles the band structure of the `N`-chain tube up to `lambda_max`.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum ZzStatus zz_bands_assemble(const struct ZzPotential *p,
                                size_t n_chains,
                                double lambda_max,
                                struct ZzBands **out);

/**
 * # Safety
 * `b` must come from [`zz_bands_assemble`] or be null.
 */
void zz_bands_free(struct ZzBands *b);

/**
 * Number of global bands below `lambda_max`.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum ZzStatus zz_bands_count(const struct ZzBands *b, size_t *out);

/**
 * Endpoints of band `index` (0-based), clipped to `lambda_max`.
 *
 * # Safety
 * `b` must be a live handle; the output pointers must be writable.
 */
enum ZzStatus zz_bands_get(const struct ZzBands *b, size_t index, double *lo, double *hi);

/**
 * Number of open gaps below `lambda_max`.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum ZzStatus zz_bands_gap_count(const struct ZzBands *b, size_t *out);

/**
 * Label `n` and endpoints of open gap `index` (0-based).
 *
 * # Safety
 * `b` must be a live handle; the output pointers must be writable.
 */
enum ZzStatus zz_bands_gap_get(const struct ZzBands *b,
                               size_t index,
                               size_t *n,
                               double *lo,
                               double *hi);

/**
 * Number of flat bands (Dirichlet eigenvalues) below `lambda_max`.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum ZzStatus zz_bands_flat_count(const struct ZzBands *b, size_t *out);

/**
 * Flat band `index` (0-based).
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum ZzStatus zz_bands_flat_get(const struct ZzBands *b, size_t index, double *out);

/**
 * Band structure as a JSON string; release it with [`zz_string_free`].
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum ZzStatus zz_bands_to_json(const struct ZzBands *b, char **out);

/**
 * # Safety
 * `s` must come from a `zz_*` function returning an owned string, or be null.
 */
void zz_string_free(char *s);

/**
 * Kirchhoff residual of the flat-band eigenfunction at the Dirichlet
 * eigenvalue `mu` in sector `k`.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum ZzStatus zz_flatband_residual(const struct ZzPotential *p,
                                   double mu,
                                   size_t k,
                                   size_t n_chains,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZIGZAG_H */
