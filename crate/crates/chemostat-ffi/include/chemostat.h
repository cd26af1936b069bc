#ifndef CHEMOSTAT_H
#define CHEMOSTAT_H

/* Generated from the chemostat-ffi crate by cbindgen; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code for every fallible call. `CHEM_STATUS_OK` is zero so the
 * codes can be tested as booleans from C.
 */
typedef enum {
  CHEM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CHEM_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  CHEM_STATUS_UTF8 = 2,
  /**
   * A parameter was out of range (including under-resolved delays).
   */
  CHEM_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The model itself is inconsistent.
   */
  CHEM_STATUS_INVALID_MODEL = 4,
  /**
   * An iteration or shooting run exhausted its budget.
   */
  CHEM_STATUS_NO_CONVERGENCE = 5,
  /**
   * The integrator produced a non-finite or otherwise unusable state.
   */
  CHEM_STATUS_NUMERIC = 6,
  /**
   * A configuration file failed to parse or validate.
   */
  CHEM_STATUS_CONFIG = 7,
  CHEM_STATUS_IO = 8,
  /**
   * An internal panic was caught at the boundary.
   */
  CHEM_STATUS_PANIC = 9,
} ChemStatus;

/**
 * Periodic chemostat model: forcing functions plus a species table.
 */
typedef struct ChemModel ChemModel;

/**
 * Nontrivial periodic orbit (fixed point of the integral operator).
 */
typedef struct ChemOrbit ChemOrbit;

/**
 * Margins and verdicts of every checked condition, plus the persistence
 * floor estimate.
 */
typedef struct ChemReport ChemReport;

/**
 * Dense-output forward simulation record.
 */
typedef struct ChemTrajectory ChemTrajectory;

/**
 * Periodic washout solution y* of the species-free system.
 */
typedef struct ChemWashout ChemWashout;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Most recent failure message on this thread, or null if none has been
 * recorded. The pointer stays valid until the next failing call on the
 * same thread; copy it if you need to keep it.
 */
const char *chem_last_error_message(void);

/**
 * Free a string returned by this library (currently only report JSON).
 *
 * # Safety
 * `s` must have been returned by this library and not freed before.
 */
void chem_string_free(char *s);

/**
 * Load a model from a TOML file in the laboratory's config format.
 *
 * # Safety
 * `path` must be a NUL-terminated string, `out` a valid pointer.
 */
ChemStatus chem_model_from_toml_file(const char *path, ChemModel **out);

/**
 * Build a model with sinusoidal forcing and Michaelis-Menten species.
 *
 * The dilution rate is `d_offset + d_sin sin(2 pi t / period) + d_cos
 * cos(2 pi t / period)` and the inflow concentration follows the same
 * shape with the `s_` coefficients. Species i has uptake ceiling
 * `uptake_max[i]`, half-saturation `half_saturation[i]` and delay
 * `delays[i]`; all three arrays hold `n_species` values.
 *
 * # Safety
 * The three arrays must be readable for `n_species` doubles (they may be
 * null when `n_species` is zero); `out` must be a valid pointer.
 */
ChemStatus chem_model_new_sinusoid(double period,
                                   double d_offset,
                                   double d_sin,
                                   double d_cos,
                                   double s_offset,
                                   double s_sin,
                                   double s_cos,
                                   size_t n_species,
                                   const double *uptake_max,
                                   const double *half_saturation,
                                   const double *delays,
                                   ChemModel **out);

/**
 * # Safety
 * `model` must come from a model constructor and not be freed twice.
 */
void chem_model_free(ChemModel *model);

/**
 * Number of species, or 0 when `model` is null.
 *
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t chem_model_species_count(const ChemModel *model);

/**
 * Common period of the forcing functions.
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_model_period(const ChemModel *model, double *out);

/**
 * Compute the periodic washout solution of the species-free system.
 *
 * # Safety
 * `model` must be a live model handle, `out` a valid pointer.
 */
ChemStatus chem_washout_solve(const ChemModel *model, ChemWashout **out);

/**
 * # Safety
 * `washout` must come from `chem_washout_solve` and not be freed twice.
 */
void chem_washout_free(ChemWashout *washout);

/**
 * Washout level y*(t) at any time (the function is periodic).
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_washout_eval(const ChemWashout *washout, double t, double *out);

/**
 * Minimum and maximum of y* over one period.
 *
 * # Safety
 * All pointers must be valid.
 */
ChemStatus chem_washout_extrema(const ChemWashout *washout, double *out_min, double *out_max);

/**
 * Evaluate every condition (extinction, existence, persistence) against
 * the washout solution and collect the margins into one report.
 *
 * # Safety
 * All pointers must be valid handles.
 */
ChemStatus chem_conditions_check(const ChemModel *model,
                                 const ChemWashout *washout,
                                 ChemReport **out);

/**
 * # Safety
 * `report` must come from `chem_conditions_check` and not be freed twice.
 */
void chem_report_free(ChemReport *report);

/**
 * True when every checked condition holds.
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_report_all_hold(const ChemReport *report, bool *out);

/**
 * Serialize the full report (conditions with margins and notes, plus the
 * persistence floor) as JSON. Free the string with `chem_string_free`.
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_report_json(const ChemReport *report, char **out);

/**
 * Solve for a nontrivial periodic orbit as a fixed point of the integral
 * operator, with default solver settings. Fails with
 * `CHEM_STATUS_NO_CONVERGENCE` when the iteration collapses to the washout
 * (the expected outcome in the extinction regime).
 *
 * # Safety
 * All pointers must be valid handles.
 */
ChemStatus chem_orbit_solve(const ChemModel *model, const ChemWashout *washout, ChemOrbit **out);

/**
 * # Safety
 * `orbit` must come from `chem_orbit_solve` and not be freed twice.
 */
void chem_orbit_free(ChemOrbit *orbit);

/**
 * Operator residual (distance to one more operator application) and
 * differential defect of the orbit.
 *
 * # Safety
 * All pointers must be valid.
 */
ChemStatus chem_orbit_residuals(const ChemOrbit *orbit, double *out_operator, double *out_defect);

/**
 * Species component x*_i(t) of the orbit (i is 0-based).
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_orbit_species_eval(const ChemOrbit *orbit, size_t species, double t, double *out);

/**
 * Reconstructed nutrient component S*(t) of the orbit.
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_orbit_nutrient_eval(const ChemOrbit *orbit, double t, double *out);

/**
 * Integrate the full delay system from a constant history.
 *
 * `initial_state` holds `1 + n` doubles: the nutrient level followed by
 * every species level, held constant on the history window.
 *
 * # Safety
 * `initial_state` must be readable for `state_len` doubles; the other
 * pointers must be valid.
 */
ChemStatus chem_simulate(const ChemModel *model,
                         const double *initial_state,
                         size_t state_len,
                         double t_end,
                         double dt,
                         ChemTrajectory **out);

/**
 * # Safety
 * `trajectory` must come from `chem_simulate` and not be freed twice.
 */
void chem_trajectory_free(ChemTrajectory *trajectory);

/**
 * Dense-output evaluation of one state component (0 is the nutrient,
 * 1 + i is species i) anywhere in [-max delay, t_end].
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_trajectory_eval(const ChemTrajectory *trajectory,
                                double t,
                                size_t component,
                                double *out);

/**
 * Final time of the run.
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_trajectory_end_time(const ChemTrajectory *trajectory, double *out);

/**
 * Most negative raw component the integrator saw before clamping; values
 * at or above -1e-12 are treated as rounding noise and clamped to zero.
 *
 * # Safety
 * Both pointers must be valid.
 */
ChemStatus chem_trajectory_min_component(const ChemTrajectory *trajectory, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CHEMOSTAT_H */
