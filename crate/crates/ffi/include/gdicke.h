#ifndef GDICKE_H
#define GDICKE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum GdStatus {
  GD_STATUS_OK = 0,
  GD_STATUS_INVALID_PARAMS = 1,
  GD_STATUS_NON_CONVERGENCE = 2,
  GD_STATUS_INVALID_EXPANSION_POINT = 3,
  GD_STATUS_UNSTABLE_MODE = 4,
  GD_STATUS_UNCERTAINTY_VIOLATION = 5,
  GD_STATUS_DIMENSION_CAP = 6,
  GD_STATUS_NO_CONVERGENCE = 7,
  GD_STATUS_NO_BOUNDARY_IN_BRACKET = 8,
  GD_STATUS_MULTIPLE_BOUNDARIES = 9,
  GD_STATUS_INSUFFICIENT_POINTS = 10,
  GD_STATUS_NON_POSITIVE_VALUE = 11,
  GD_STATUS_INVALID_SPEC = 12,
  GD_STATUS_NULL_POINTER = 13,
  GD_STATUS_BUFFER_TOO_SMALL = 14,
  GD_STATUS_PANIC = 15,
} GdStatus;

typedef enum GdAxis {
  GD_AXIS_CHI = 0,
  GD_AXIS_LAMBDA = 1,
  GD_AXIS_OMEGA = 2,
} GdAxis;

/**
 * Phase codes 1, 2, 3 for phases I, II, III.
 */
typedef enum GdPhase {
  GD_PHASE_PARAMAGNETIC_NORMAL = 1,
  GD_PHASE_FERROMAGNETIC_SUPERRADIANT = 2,
  GD_PHASE_ANTIFERROMAGNETIC_NORMAL = 3,
} GdPhase;

/**
 * Two lowest finite-J levels and ground-state expectation values.
 */
typedef struct GdGroundState GdGroundState;

/**
 * Model couplings.
 */
typedef struct GdModel GdModel;

/**
 * Gaussian fluctuation analysis at the mean-field ground state.
 */
typedef struct GdSpectrum GdSpectrum;

typedef struct GdMeanField {
  double theta1;
  double theta2;
  double alpha;
  double energy;
  double gradient_norm;
  enum GdPhase phase;
  bool degenerate;
} GdMeanField;

typedef struct GdCriticalPoint {
  double value;
  double width;
  enum GdPhase lower_phase;
  enum GdPhase upper_phase;
  bool first_order;
  /**
   * NaN for a first-order transition.
   */
  double gap_minimum_at;
  /**
   * NaN for a first-order transition.
   */
  double gap_minimum;
} GdCriticalPoint;

typedef struct GdExponentFit {
  double slope;
  double intercept;
  /**
   * Standard error of the slope. Not called `stderr`, which is a macro in C.
   */
  double slope_stderr;
  size_t points;
} GdExponentFit;

typedef struct GdEdSummary {
  size_t dim;
  size_t n_cut;
  double e0;
  double e1;
  double gap;
  double residual;
  bool degenerate;
  /**
   * ⟨Π⟩ of the ground state.
   */
  double parity;
  /**
   * ⟨J₁ₓ⟩/J, ⟨J₂ₓ⟩/J
   */
  double jx1;
  double jx2;
  /**
   * ⟨N_B⟩/N
   */
  double nb;
} GdEdSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated, into
 * `buf` and returns the buffer size needed (message length + 1). Nothing is
 * written when `buf` is null or `cap` is too small.
 *
 * # Safety
 * `buf` must be null or point to at least `cap` writable bytes.
 */
size_t gd_last_error_message(char *buf, size_t cap);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *gd_status_name(enum GdStatus status);

/**
 * # Safety
 * `out` must be a valid pointer; on success `*out` owns a new model that
 * must be released with [`gd_model_free`].
 */
enum GdStatus gd_model_new(double spin_freq,
                           double boson_freq,
                           double chi,
                           double lambda,
                           struct GdModel **out);

/**
 * # Safety
 * `model` must be null or a pointer from [`gd_model_new`] not yet freed.
 */
void gd_model_free(struct GdModel *model);

/**
 * Replaces one coupling. The model is left unchanged if the result is invalid.
 *
 * # Safety
 * `model` must be a live handle from [`gd_model_new`].
 */
enum GdStatus gd_model_set(struct GdModel *model, enum GdAxis axis, double value);

/**
 * # Safety
 * `model` must be a live handle; `out` must be valid for a write.
 */
enum GdStatus gd_classify_phase(const struct GdModel *model, enum GdPhase *out);

/**
 * # Safety
 * `model` must be a live handle; `out` must be valid for a write.
 */
enum GdStatus gd_minimize(const struct GdModel *model, struct GdMeanField *out);

/**
 * Smallest normal-mode energy at the mean-field ground state.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for a write.
 */
enum GdStatus gd_energy_gap(const struct GdModel *model, double *out);

/**
 * Entropy (nats) of one mode with standard deviations `dx`, `dp`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum GdStatus gd_entanglement_entropy(double dx, double dp, double *out);

/**
 * # Safety
 * `model` must be a live handle; on success `*out` owns a spectrum to be
 * released with [`gd_spectrum_free`].
 */
enum GdStatus gd_spectrum_new(const struct GdModel *model, struct GdSpectrum **out);

/**
 * # Safety
 * `spectrum` must be null or a pointer from [`gd_spectrum_new`] not yet freed.
 */
void gd_spectrum_free(struct GdSpectrum *spectrum);

/**
 * Writes the three normal-mode energies, ascending.
 *
 * # Safety
 * `out` must have room for 3 doubles.
 */
enum GdStatus gd_spectrum_deltas(const struct GdSpectrum *spectrum, double *out);

/**
 * Writes `(Δxᵢ)²` and `(Δpᵢ)²` for the two spin modes and the boson.
 *
 * # Safety
 * `dx2` and `dp2` must each have room for 3 doubles.
 */
enum GdStatus gd_spectrum_variances(const struct GdSpectrum *spectrum, double *dx2, double *dp2);

/**
 * # Safety
 * `out` must have room for 3 doubles.
 */
enum GdStatus gd_spectrum_entropies(const struct GdSpectrum *spectrum, double *out);

/**
 * Row-major 6×6 covariance matrix in the `(x₁, x₂, x₃, p₁, p₂, p₃)` order.
 *
 * # Safety
 * `out` must have room for 36 doubles.
 */
enum GdStatus gd_spectrum_covariance(const struct GdSpectrum *spectrum, double *out);

/**
 * Row-major 6×6 symplectic matrix S with `Sᵀ H S = diag(Δ, Δ)`.
 *
 * # Safety
 * `out` must have room for 36 doubles.
 */
enum GdStatus gd_spectrum_symplectic(const struct GdSpectrum *spectrum, double *out);

/**
 * Phase boundary along `axis` inside `[lo, hi]`, starting from the model's
 * other couplings.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for a write.
 */
enum GdStatus gd_locate_critical(const struct GdModel *model,
                                 enum GdAxis axis,
                                 double lo,
                                 double hi,
                                 struct GdCriticalPoint *out);

/**
 * Log-log least squares over the points with `dmin <= distance <= dmax`.
 *
 * # Safety
 * `distances` and `values` must each point to `n` doubles; `out` must be
 * valid for a write.
 */
enum GdStatus gd_fit_exponent(const double *distances,
                              const double *values,
                              size_t n,
                              double dmin,
                              double dmax,
                              struct GdExponentFit *out);

/**
 * Exact diagonalization with `two_j` spins per ensemble. `n_cut = 0`
 * selects the default Fock cutoff.
 *
 * # Safety
 * `model` must be a live handle; on success `*out` owns a result to be
 * released with [`gd_ground_state_free`].
 */
enum GdStatus gd_ground_state_new(const struct GdModel *model,
                                  size_t two_j,
                                  size_t n_cut,
                                  struct GdGroundState **out);

/**
 * # Safety
 * `state` must be null or a pointer from [`gd_ground_state_new`] not yet freed.
 */
void gd_ground_state_free(struct GdGroundState *state);

/**
 * # Safety
 * `state` must be a live handle; `out` must be valid for a write.
 */
enum GdStatus gd_ground_state_summary(const struct GdGroundState *state, struct GdEdSummary *out);

/**
 * Copies the ground-state vector (basis index `((m₁+J)(2J+1) + m₂+J)·n_cut + n`).
 *
 * # Safety
 * `out` must have room for `len` doubles; `len` must be at least the
 * Hilbert space dimension reported by [`gd_ground_state_summary`].
 */
enum GdStatus gd_ground_state_vector(const struct GdGroundState *state, double *out, size_t len);

/**
 * Crate version, NUL-terminated.
 */
const char *gd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GDICKE_H */
