#ifndef GAMOW_H
#define GAMOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define GAMOW_NORMALIZATION_DERIVATIVE 0

#define GAMOW_NORMALIZATION_FACTORIAL 1

typedef enum GamowStatus {
  GAMOW_STATUS_OK = 0,
  GAMOW_STATUS_NULL_POINTER,
  GAMOW_STATUS_INVALID_PARAMETER,
  GAMOW_STATUS_POLE_EVALUATION,
  GAMOW_STATUS_NO_CONVERGENCE,
  GAMOW_STATUS_INDEX_OUT_OF_RANGE,
  GAMOW_STATUS_NEGATIVE_TIME,
  GAMOW_STATUS_WRONG_REPRESENTATION,
  GAMOW_STATUS_EMPTY_GRID,
  GAMOW_STATUS_CONFIG_INVALID,
  GAMOW_STATUS_J_TOO_LARGE,
  GAMOW_STATUS_IO,
  GAMOW_STATUS_BUFFER_TOO_SMALL,
  GAMOW_STATUS_PANIC,
} GamowStatus;

// S-matrix model: pole, background phase and gauge flag.
typedef struct GamowModel GamowModel;

// A state operator on the Gamow subspace.
typedef struct GamowState GamowState;

// The `r`-dimensional span of the Gamow vectors of one pole.
typedef struct GamowSubspace GamowSubspace;

// Test function `sum_j c_j / (w - i a_j)^m_j`.
typedef struct GamowTestFunction GamowTestFunction;

typedef struct GamowComplex {
  double re;
  double im;
} GamowComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the length needed including the NUL, or 0 if
// the last call succeeded.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t gamow_last_error_message(char *buf, size_t len);

// Creates a model. `gamma` holds the coefficients of the background phase
// polynomial in ascending powers; `n_gamma == 0` means no background.
//
// # Safety
// `gamma` must point to `n_gamma` doubles; `out` must be writable.
enum GamowStatus gamow_model_new(double energy,
                                 double width,
                                 size_t order,
                                 const double *gamma,
                                 size_t n_gamma,
                                 bool absorb_gauge,
                                 struct GamowModel **out);

// # Safety
// `model` must be null or a handle from [`gamow_model_new`], freed once.
void gamow_model_free(struct GamowModel *model);

// `S(omega)` on the second sheet.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum GamowStatus gamow_s_matrix_eval(const struct GamowModel *model,
                                     struct GamowComplex omega,
                                     struct GamowComplex *out);

// Partial-fraction coefficients `c_1..c_r` of the resonant factor.
//
// # Safety
// `model` must be a live handle; `out` must hold `len` values.
enum GamowStatus gamow_pole_expansion_coeffs(const struct GamowModel *model,
                                             struct GamowComplex *out,
                                             size_t len);

// Normalized `|1/(E - z_R)^(n+1)|^2` on `grid`.
//
// # Safety
// `model` must be a live handle; `grid` and `out` must hold `len` doubles.
enum GamowStatus gamow_lineshape(const struct GamowModel *model,
                                 size_t n,
                                 const double *grid,
                                 double *out,
                                 size_t len);

// Builds `sum_j c[j] / (w - i a[j])^m[j]`.
//
// # Safety
// `a`, `m` and `c` must each hold `n` values; `out` must be writable.
enum GamowStatus gamow_test_function_new(const double *a,
                                         const uint32_t *m,
                                         const struct GamowComplex *c,
                                         size_t n,
                                         struct GamowTestFunction **out);

// # Safety
// `f` must be null or a handle from [`gamow_test_function_new`], freed once.
void gamow_test_function_free(struct GamowTestFunction *f);

// Pole term of `(psi(t), phi)`.
//
// # Safety
// All handles must be live; `out` must be writable.
enum GamowStatus gamow_pole_term(const struct GamowModel *model,
                                 const struct GamowTestFunction *psi,
                                 const struct GamowTestFunction *phi,
                                 double t,
                                 struct GamowComplex *out);

// Gamow-vector expansion coefficients `b_0..b_{r-1}` of `phi`.
//
// # Safety
// Handles must be live; `out` must hold `len` values.
enum GamowStatus gamow_expansion_coeffs(const struct GamowModel *model,
                                        const struct GamowTestFunction *phi,
                                        struct GamowComplex *out,
                                        size_t len);

// # Safety
// `out` must be writable.
enum GamowStatus gamow_subspace_new(double energy,
                                    double width,
                                    size_t order,
                                    uint32_t normalization,
                                    struct GamowSubspace **out);

// # Safety
// `space` must be null or a handle from [`gamow_subspace_new`], freed once.
void gamow_subspace_free(struct GamowSubspace *space);

// Dimension `r`, or 0 for a null handle.
//
// # Safety
// `space` must be null or live.
size_t gamow_subspace_dim(const struct GamowSubspace *space);

// Hamiltonian on the subspace, `dim * dim` values.
//
// # Safety
// `space` must be live; `out` must hold `len` values.
enum GamowStatus gamow_hamiltonian(const struct GamowSubspace *space,
                                   struct GamowComplex *out,
                                   size_t len);

// Evolution `exp(-iHt)` for `t >= 0`, `dim * dim` values.
//
// # Safety
// `space` must be live; `out` must hold `len` values.
enum GamowStatus gamow_evolution(const struct GamowSubspace *space,
                                 double t,
                                 struct GamowComplex *out,
                                 size_t len);

// `W^(n)`, the exponentially decaying operator of order `n < dim`.
//
// # Safety
// `space` must be live; `out` must be writable.
enum GamowStatus gamow_state_w_n(const struct GamowSubspace *space,
                                 size_t n,
                                 struct GamowState **out);

// `W`, the sum of all `W^(n)` scaled by `2 pi Gamma`.
//
// # Safety
// `space` must be live; `out` must be writable.
enum GamowStatus gamow_state_w_total(const struct GamowSubspace *space, struct GamowState **out);

// The dyad `|k><l|`.
//
// # Safety
// `space` must be live; `out` must be writable.
enum GamowStatus gamow_state_dyad(const struct GamowSubspace *space,
                                  size_t k,
                                  size_t l,
                                  struct GamowState **out);

// # Safety
// `state` must be null or a handle from a `gamow_state_*` constructor, freed once.
void gamow_state_free(struct GamowState *state);

// Matrix of the operator, `dim * dim` values.
//
// # Safety
// `state` must be live; `out` must hold `len` values.
enum GamowStatus gamow_state_matrix(const struct GamowState *state,
                                    struct GamowComplex *out,
                                    size_t len);

// Matrix of `W(t)` for `t >= 0`, `dim * dim` values.
//
// # Safety
// `state` must be live; `out` must hold `len` values.
enum GamowStatus gamow_state_evolve(const struct GamowState *state,
                                    double t,
                                    struct GamowComplex *out,
                                    size_t len);

// Largest relative deviation of `W(t)` from `exp(-Gamma t) W` over `times`.
//
// # Safety
// `state` must be live; `times` must hold `n` doubles; `out` must be writable.
enum GamowStatus gamow_decay_deviation(const struct GamowState *state,
                                       const double *times,
                                       size_t n,
                                       double *out);

// Exact uniqueness certificate for `j`. Writes whether it passed and the
// nullspace dimension; either pointer may be null.
//
// # Safety
// Non-null pointers must be writable.
enum GamowStatus gamow_uniqueness_certify(size_t j, bool *passed, size_t *dimension);

// The certificate for `j` as a JSON string. Free it with [`gamow_string_free`].
//
// # Safety
// `out` must be writable.
enum GamowStatus gamow_uniqueness_report_json(size_t j, char **out);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void gamow_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAMOW_H */
