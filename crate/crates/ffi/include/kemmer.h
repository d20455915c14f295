#ifndef KEMMER_H
#define KEMMER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum {
  KEMMER_STATUS_OK = 0,
  KEMMER_STATUS_NULL_POINTER = 1,
  KEMMER_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed or inconsistent configuration.
   */
  KEMMER_STATUS_INVALID_CONFIG = 3,
  /**
   * Physics precondition failed (off-shell mode, node, out of domain, ...).
   */
  KEMMER_STATUS_DOMAIN = 4,
  KEMMER_STATUS_IO = 5,
  /**
   * Index or buffer size out of range.
   */
  KEMMER_STATUS_OUT_OF_RANGE = 6,
  KEMMER_STATUS_PANIC = 7,
} KemmerStatus;

/**
 * How a trajectory ended.
 */
typedef enum {
  KEMMER_TERMINATION_COMPLETED = 0,
  KEMMER_TERMINATION_NODE_ABORT = 1,
  KEMMER_TERMINATION_DOMAIN_EXIT = 2,
} KemmerTermination;

/**
 * Nonrelativistic Gaussian packet, spin 0 or 1.
 */
typedef struct KemmerNrField KemmerNrField;

/**
 * Borrowed view of a built-in DKP representation.
 */
typedef struct KemmerRep KemmerRep;

/**
 * Validated scenario, ready to run.
 */
typedef struct KemmerScenario KemmerScenario;

/**
 * Integrated single-particle trajectory.
 */
typedef struct KemmerTrajectory KemmerTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *kemmer_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void kemmer_string_free(char *s);

/**
 * Scenario catalog text; release with `kemmer_string_free`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
KemmerStatus kemmer_list_scenarios(char **out);

/**
 * Parses and validates a TOML scenario.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
KemmerStatus kemmer_scenario_parse(const char *toml, KemmerScenario **out);

/**
 * Runs a scenario into the existing directory `out_dir`. `passed` receives
 * 1 when every check passed, else 0.
 *
 * # Safety
 * `scenario` must be a live handle, `out_dir` a NUL-terminated string and
 * `passed` a valid pointer.
 */
KemmerStatus kemmer_scenario_run(const KemmerScenario *scenario,
                                 const char *out_dir,
                                 uint64_t seed,
                                 bool use_seed,
                                 int32_t *passed);

/**
 * # Safety
 * `scenario` must be NULL or a live handle.
 */
void kemmer_scenario_free(KemmerScenario *scenario);

/**
 * Runs one acceptance criterion (1..=10).
 *
 * # Safety
 * `passed` must be a valid pointer.
 */
KemmerStatus kemmer_verify_criterion(uint32_t id, bool fast, uint64_t seed, int32_t *passed);

/**
 * The spin-0 (5-dim) or spin-1 (10-dim) representation.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
KemmerStatus kemmer_rep_new(uint32_t spin, KemmerRep **out);

/**
 * # Safety
 * `rep` must be a live handle and `dim` a valid pointer.
 */
KemmerStatus kemmer_rep_dimension(const KemmerRep *rep, size_t *dim);

/**
 * Copies `beta^mu` row-major as interleaved `re, im` into `buf`, which
 * must hold `2 * dim * dim` doubles.
 *
 * # Safety
 * `rep` must be a live handle and `buf` valid for `len` doubles.
 */
KemmerStatus kemmer_rep_beta(const KemmerRep *rep, uint32_t mu, double *buf, size_t len);

/**
 * Largest residual of the DKP algebra over all index triples.
 *
 * # Safety
 * `rep` must be a live handle and `max_residual` a valid pointer.
 */
KemmerStatus kemmer_rep_verify(const KemmerRep *rep, double *max_residual);

/**
 * # Safety
 * `rep` must be NULL or a live handle.
 */
void kemmer_rep_free(KemmerRep *rep);

/**
 * Gaussian packet of width `sigma` centred at `center[3]` with wave vector
 * `k[3]`. Spin 1 needs `eps` as 6 doubles (`re, im` per axis), normalised
 * here; spin 0 requires `eps == NULL`.
 *
 * # Safety
 * `center` and `k` must point to 3 doubles, `eps` to 6 or be NULL, and
 * `out` must be a valid pointer.
 */
KemmerStatus kemmer_nr_gaussian(uint32_t spin,
                                double mass,
                                double sigma,
                                const double *center,
                                const double *k,
                                const double *eps,
                                KemmerNrField **out);

/**
 * Guidance velocity `v[3]` and density at `(t, x[3])`.
 *
 * # Safety
 * `field` must be a live handle, `x` must point to 3 doubles, `v` to room
 * for 3 and `density` must be valid.
 */
KemmerStatus kemmer_nr_velocity(const KemmerNrField *field,
                                double t,
                                const double *x,
                                double *v,
                                double *density);

/**
 * # Safety
 * `field` must be NULL or a live handle.
 */
void kemmer_nr_field_free(KemmerNrField *field);

/**
 * RK4 from `(t0, x0[3])` to `t1` with steps no longer than `dt`.
 *
 * # Safety
 * `field` must be a live handle, `x0` must point to 3 doubles and `out`
 * must be a valid pointer.
 */
KemmerStatus kemmer_nr_integrate(const KemmerNrField *field,
                                 double dt,
                                 size_t max_steps,
                                 double node_threshold,
                                 const double *x0,
                                 double t0,
                                 double t1,
                                 KemmerTrajectory **out);

/**
 * # Safety
 * `tr` must be a live handle and `len` a valid pointer.
 */
KemmerStatus kemmer_trajectory_len(const KemmerTrajectory *tr, size_t *len);

/**
 * # Safety
 * `tr` must be a live handle and `termination` a valid pointer.
 */
KemmerStatus kemmer_trajectory_termination(const KemmerTrajectory *tr,
                                           KemmerTermination *termination);

/**
 * Time and position of sample `index`.
 *
 * # Safety
 * `tr` must be a live handle, `t` valid and `x` room for 3 doubles.
 */
KemmerStatus kemmer_trajectory_sample(const KemmerTrajectory *tr,
                                      size_t index,
                                      double *t,
                                      double *x);

/**
 * # Safety
 * `tr` must be NULL or a live handle.
 */
void kemmer_trajectory_free(KemmerTrajectory *tr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KEMMER_H */
