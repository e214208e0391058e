#ifndef SINGLECOPY_H
#define SINGLECOPY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_POINTER = 1,
  SC_STATUS_INVALID_ARGUMENT = 2,
  SC_STATUS_INVALID_MODEL = 3,
  SC_STATUS_DOMAIN = 4,
  SC_STATUS_SIZE_LIMIT = 5,
  SC_STATUS_NUMERICAL = 6,
  SC_STATUS_VALIDATION_FAILED = 7,
  SC_STATUS_PANIC = 8,
} ScStatus;

typedef enum ScUniversality {
  SC_UNIVERSALITY_FREE_FERMION_C1 = 0,
  SC_UNIVERSALITY_ISING_C_HALF = 1,
  SC_UNIVERSALITY_GAPPED = 2,
} ScUniversality;

typedef enum ScBranch {
  SC_BRANCH_LAMBDA_BELOW1 = 0,
  SC_BRANCH_LAMBDA_ABOVE1 = 1,
} ScBranch;

// Opaque chain parameters.
typedef struct ScModel ScModel;

// Opaque single-particle spectrum.
typedef struct ScSpectrum ScSpectrum;

typedef struct ScClass {
  bool is_critical;
  // NaN for gapped models.
  double central_charge;
  enum ScUniversality universality;
} ScClass;

typedef struct ScReport {
  size_t block_len;
  double entropy;
  double log_inv_lambda1;
  double e1_floored;
  double lambda1;
} ScReport;

typedef struct ScClosedForms {
  double epsilon;
  double log_inv_lambda1_closed;
  double log_inv_lambda1_sum;
  double entropy_closed;
  double entropy_sum;
  double ratio;
  double log_inv_lambda1_phase;
  double entropy_phase;
} ScClosedForms;

typedef struct ScIntegrals {
  double i_entropy;
  double i_single;
  double abs_error;
} ScIntegrals;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *sc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sc_version(void);

// # Safety
// `out` must be valid for writes. The handle is released with
// [`sc_model_free`].
enum ScStatus sc_model_new(double gamma, double lambda, struct ScModel **out);

// # Safety
// `model` must be null or a handle from [`sc_model_new`] not yet freed.
void sc_model_free(struct ScModel *model);

// # Safety
// `model` must be a live handle and `out` valid for writes.
enum ScStatus sc_model_classify(const struct ScModel *model, struct ScClass *out);

// # Safety
// `model` must be a live handle and `out` valid for writes.
enum ScStatus sc_model_x_parameter(const struct ScModel *model, double *out);

// Spectrum of a block of `block_len` sites of the infinite chain.
//
// # Safety
// `model` must be a live handle and `out` valid for writes. The result is
// released with [`sc_spectrum_free`].
enum ScStatus sc_block_spectrum(const struct ScModel *model,
                                size_t block_len,
                                struct ScSpectrum **out);

// Spectrum from caller-supplied values in [-1, 1].
//
// # Safety
// `values` must point to `len` readable doubles and `out` be valid for
// writes.
enum ScStatus sc_spectrum_new(const double *values, size_t len, struct ScSpectrum **out);

// # Safety
// `spectrum` must be null or a live handle.
void sc_spectrum_free(struct ScSpectrum *spectrum);

// Number of values; 0 for a null handle.
//
// # Safety
// `spectrum` must be null or a live handle.
size_t sc_spectrum_len(const struct ScSpectrum *spectrum);

// Copies the values, sorted by decreasing magnitude, into `buf`.
//
// # Safety
// `spectrum` must be a live handle and `buf` valid for `capacity` writes.
enum ScStatus sc_spectrum_values(const struct ScSpectrum *spectrum, double *buf, size_t capacity);

// # Safety
// `spectrum` must be a live handle and `out` valid for writes.
enum ScStatus sc_spectrum_report(const struct ScSpectrum *spectrum, struct ScReport *out);

// Complete elliptic integral of the first kind, modulus `x`.
//
// # Safety
// `out` must be valid for writes.
enum ScStatus sc_elliptic_k(double x, double *out);

// Level spacing of a gapped model outside the circle. `branch_out` may be
// null.
//
// # Safety
// `model` must be a live handle, `epsilon_out` valid for writes and
// `branch_out` null or valid for writes.
enum ScStatus sc_epsilon(const struct ScModel *model,
                         double *epsilon_out,
                         enum ScBranch *branch_out);

// # Safety
// `out` must be valid for writes.
enum ScStatus sc_closed_forms(double epsilon, enum ScBranch branch, struct ScClosedForms *out);

// # Safety
// `out` must be valid for writes.
enum ScStatus sc_fisher_hartwig_integrals(struct ScIntegrals *out);

// Free-fermion vs exact-diagonalization check over the model battery.
// Writes the largest deviation and returns `VALIDATION_FAILED` when it
// exceeds 1e-8.
//
// # Safety
// `max_deviation_out` must be valid for writes.
enum ScStatus sc_validate(size_t n_sites, double *max_deviation_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SINGLECOPY_H */
