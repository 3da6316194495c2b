#ifndef QCOURNOT_H
#define QCOURNOT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Values for the `mode` argument of [`qc_constrained_equilibrium`].
 */
typedef enum QcClampMode {
  QC_CLAMP_MODE_PAPER_CLAMP = 0,
  QC_CLAMP_MODE_CAP_SATURATED = 1,
  QC_CLAMP_MODE_ITERATED_BEST_RESPONSE = 2,
} QcClampMode;

/**
 * Values for the `kind` field of [`QcEnergyModel`].
 */
typedef enum QcEnergyKind {
  /**
   * `beta * log2(q)^exponent`, defined for `q > 1`.
   */
  QC_ENERGY_KIND_LOG_POWER = 0,
  /**
   * `beta * q^exponent`.
   */
  QC_ENERGY_KIND_POWER_LAW = 1,
} QcEnergyKind;

/**
 * Values for the hardware `kind` arguments.
 */
typedef enum QcHardwareKind {
  QC_HARDWARE_KIND_RYDBERG = 0,
  QC_HARDWARE_KIND_ION_TRAP = 1,
  QC_HARDWARE_KIND_CLASSICAL_HPC = 2,
} QcHardwareKind;

typedef enum QcStatus {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  QC_STATUS_INVALID_ARGUMENT = 2,
  QC_STATUS_DIMENSION_MISMATCH = 3,
  QC_STATUS_SINGULAR = 4,
  QC_STATUS_DEGENERATE = 5,
  QC_STATUS_DOMAIN = 6,
  QC_STATUS_NO_CONVERGENCE = 7,
  QC_STATUS_NO_CROSSING = 8,
  QC_STATUS_INVALID_BRACKET = 9,
  QC_STATUS_NOT_FINITE = 10,
  QC_STATUS_CONFIG = 11,
  QC_STATUS_PANIC = 12,
} QcStatus;

/**
 * General market with `n` firms.
 */
typedef struct QcMarket QcMarket;

/**
 * Validated two-group market.
 */
typedef struct QcTwoGroup QcTwoGroup;

/**
 * Parameters of the two-group model.
 */
typedef struct QcTwoGroupParams {
  size_t n_q;
  size_t n_c;
  double a_q;
  double a_c;
  double theta_q;
  double theta_c;
  double gamma_qq;
  double gamma_cc;
  double gamma_qc;
} QcTwoGroupParams;

/**
 * Per-firm equilibrium of each group.
 */
typedef struct QcGroupEquilibrium {
  double q_q;
  double q_c;
  double p_q;
  double p_c;
  double pi_q;
  double pi_c;
  double denominator;
} QcGroupEquilibrium;

/**
 * Entries of the inverse of the two-group FOC matrix. The within-group
 * off-diagonal entries are NaN with the `has_` flag cleared when the group
 * has a single firm.
 */
typedef struct QcBlockInverse {
  double omega_qq;
  double varpi_qq;
  bool has_varpi_qq;
  double omega_cc;
  double varpi_cc;
  bool has_varpi_cc;
  double omega_qc;
} QcBlockInverse;

/**
 * Energy model; `kind` takes a [`QcEnergyKind`] value.
 */
typedef struct QcEnergyModel {
  uint32_t kind;
  double beta;
  double exponent;
} QcEnergyModel;

/**
 * Group outcome under a per-firm energy budget.
 */
typedef struct QcConstrained {
  double cap_q;
  double cap_c;
  double q_q;
  double q_c;
  double pi_q;
  double pi_c;
  bool binding_q;
  bool binding_c;
  /**
   * Best-response sweeps used; zero for the closed-form modes.
   */
  size_t sweeps;
} QcConstrained;

/**
 * Hardware energy constants in Joules.
 */
typedef struct QcHardwareConstants {
  double alpha;
  double mu;
  double beta_rydberg;
  double beta_ion;
  double beta_classical;
} QcHardwareConstants;

/**
 * Intercept at which both groups draw the same per-firm energy.
 */
typedef struct QcCriticalScale {
  double a_star;
  double e_q;
  double e_c;
  double residual;
  /**
   * Bracket actually searched.
   */
  double lo;
  double hi;
} QcCriticalScale;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none failed yet.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *qc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qc_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be freed twice.
 */
void qc_string_free(char *s);

/**
 * Creates a market from intercepts, own sensitivities and a row-major
 * `n * n` cross-sensitivity matrix whose diagonal is ignored.
 *
 * # Safety
 * `a` and `theta` must point to `n` doubles, `cross` to `n * n` doubles.
 */
enum QcStatus qc_market_new(size_t n,
                            const double *a,
                            const double *theta,
                            const double *cross,
                            struct QcMarket **out);

/**
 * # Safety
 * `market` must come from [`qc_market_new`] and must not be used afterwards.
 */
void qc_market_free(struct QcMarket *market);

/**
 * Number of firms, or zero for a null handle.
 *
 * # Safety
 * `market` must be null or a live handle.
 */
size_t qc_market_size(const struct QcMarket *market);

/**
 * Solves the interior equilibrium. Each output array holds `len` doubles and
 * may be null when not wanted; `len` must equal the number of firms.
 *
 * # Safety
 * Non-null output pointers must be writable for `len` doubles.
 */
enum QcStatus qc_market_equilibrium(const struct QcMarket *market,
                                    size_t len,
                                    double *quantities,
                                    double *prices,
                                    double *profits);

/**
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum QcStatus qc_two_group_new(const struct QcTwoGroupParams *params, struct QcTwoGroup **out);

/**
 * # Safety
 * `market` must come from [`qc_two_group_new`] and must not be used afterwards.
 */
void qc_two_group_free(struct QcTwoGroup *market);

/**
 * # Safety
 * `market` must be a live handle and `out` writable.
 */
enum QcStatus qc_two_group_equilibrium(const struct QcTwoGroup *market,
                                       struct QcGroupEquilibrium *out);

/**
 * # Safety
 * `market` must be a live handle and `out` writable.
 */
enum QcStatus qc_two_group_block_inverse(const struct QcTwoGroup *market,
                                         struct QcBlockInverse *out);

/**
 * Energy drawn by one firm producing `q`.
 *
 * # Safety
 * `model` must be readable and `out` writable.
 */
enum QcStatus qc_energy_power(const struct QcEnergyModel *model, double q, double *out);

/**
 * Largest per-firm quantity whose energy stays within `e`; may be +inf.
 *
 * # Safety
 * `model` must be readable and `out` writable.
 */
enum QcStatus qc_energy_quantity_cap(const struct QcEnergyModel *model, double e, double *out);

/**
 * `mode` takes a [`QcClampMode`] value.
 *
 * # Safety
 * `market`, `model_q` and `model_c` must be readable and `out` writable.
 */
enum QcStatus qc_constrained_equilibrium(const struct QcTwoGroup *market,
                                         const struct QcEnergyModel *model_q,
                                         const struct QcEnergyModel *model_c,
                                         double energy_cap,
                                         uint32_t mode,
                                         struct QcConstrained *out);

/**
 * Writes the built-in hardware constants.
 *
 * # Safety
 * `out` must be writable.
 */
enum QcStatus qc_hardware_constants_default(struct QcHardwareConstants *out);

/**
 * Energy of one run of size `n` on `kind`. Null `constants` selects the defaults.
 *
 * # Safety
 * `constants` must be null or readable; `out` must be writable.
 */
enum QcStatus qc_algorithm_energy(uint32_t kind,
                                  double n,
                                  const struct QcHardwareConstants *constants,
                                  double *out);

/**
 * Searches `[lo, hi]` for the critical intercept. With `expand` set the upper
 * end is widened by factors of ten while no crossing is found.
 * Returns `QC_STATUS_NO_CROSSING` when the energy gap keeps one sign.
 *
 * # Safety
 * `market` must be a live handle, `constants` null or readable, `out` writable.
 */
enum QcStatus qc_critical_scale(const struct QcTwoGroup *market,
                                uint32_t quantum,
                                uint32_t classical,
                                const struct QcHardwareConstants *constants,
                                double lo,
                                double hi,
                                bool expand,
                                struct QcCriticalScale *out);

/**
 * Large-population approximations of the per-firm quantities at intercept `a`.
 *
 * # Safety
 * `market` must be a live handle; `q_q` and `q_c` writable.
 */
enum QcStatus qc_asymptotic_quantities(const struct QcTwoGroup *market,
                                       double a,
                                       double *q_q,
                                       double *q_c);

/**
 * Runs a CLI command (`equilibrium`, `sweep-energy`, `sweep-ratio`,
 * `sweep-scale`, `threshold`, `verify`) in process.
 *
 * The config comes from `config_json` or the `preset` name; at most one may
 * be non-null. `seed` may be null for the default; `trials` of zero keeps the
 * per-suite defaults. On `QC_STATUS_OK` the command's exit code goes to
 * `exit_code`, the report to `report` and the rendered table (or null) to
 * `table`. Free both strings with [`qc_string_free`].
 *
 * # Safety
 * String arguments must be null or NUL-terminated; out-pointers writable.
 */
enum QcStatus qc_run_command(const char *command,
                             const char *config_json,
                             const char *preset,
                             const uint64_t *seed,
                             size_t trials,
                             int32_t *exit_code,
                             char **report,
                             char **table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCOURNOT_H */
