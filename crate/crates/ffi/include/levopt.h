#ifndef LEVOPT_H
#define LEVOPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum LevoptStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  LEVOPT_STATUS_OK = 0,
  LEVOPT_STATUS_NULL_POINTER = 1,
  LEVOPT_STATUS_INVALID_UTF8 = 2,
  LEVOPT_STATUS_PARSE = 3,
  LEVOPT_STATUS_VALIDATION = 4,
  LEVOPT_STATUS_WRONG_OPTICS = 5,
  LEVOPT_STATUS_INFEASIBLE = 6,
  LEVOPT_STATUS_NUMERICAL = 7,
  LEVOPT_STATUS_SERIALIZATION = 8,
  LEVOPT_STATUS_PANIC = 9,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum LevoptStatus LevoptStatus;
#else
typedef int32_t LevoptStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Cartesian axis for `levopt_optimize_gain`.
 */
enum LevoptAxis
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  LEVOPT_AXIS_X = 0,
  LEVOPT_AXIS_Y = 1,
  LEVOPT_AXIS_Z = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum LevoptAxis LevoptAxis;
#else
typedef int32_t LevoptAxis;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque scenario handle.
 */
typedef struct LevoptScenario LevoptScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a scenario JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
LevoptStatus levopt_scenario_from_json(const char *json, struct LevoptScenario **out);

/**
 * Loads a bundled scenario by name (`kiesel` or `gieseler`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
LevoptStatus levopt_scenario_bundled(const char *name, struct LevoptScenario **out);

/**
 * Releases a scenario. Null is ignored.
 *
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void levopt_scenario_free(struct LevoptScenario *scenario);

/**
 * A copy of `scenario` at another pressure, given in Pa.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
LevoptStatus levopt_scenario_with_pressure_pa(const struct LevoptScenario *scenario,
                                              double pressure_pa,
                                              struct LevoptScenario **out);

/**
 * The scenario as a JSON document.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
LevoptStatus levopt_scenario_to_json(const struct LevoptScenario *scenario, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void levopt_string_free(char *s);

/**
 * Particle temperature, drag and power balance as a JSON object.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
LevoptStatus levopt_temperature(const struct LevoptScenario *scenario, char **out);

/**
 * Cavity phonon budget as a JSON object. Unbounded occupations are
 * given as the string "diverges".
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
LevoptStatus levopt_cavity_budget(const struct LevoptScenario *scenario, char **out);

/**
 * Cooling power in W that brings the cavity occupation to `target`.
 *
 * # Safety
 * `scenario` must be a live handle; `watts` must be writable.
 */
LevoptStatus levopt_required_cooling_power(const struct LevoptScenario *scenario,
                                           double target,
                                           double *watts);

/**
 * Feedback phonon budget at the scenario's gains as a JSON object.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
LevoptStatus levopt_feedback_budget(const struct LevoptScenario *scenario, char **out);

/**
 * Feedback gain minimising the phonon number along `axis`.
 *
 * # Safety
 * `scenario` must be a live handle; the output pointers must be writable.
 */
LevoptStatus levopt_optimize_gain(const struct LevoptScenario *scenario,
                                  LevoptAxis axis,
                                  double *gain_rad_s,
                                  double *phonons,
                                  double *rms_m);

/**
 * Growth in feedback-noise sensitivity, (index_ref/index)².
 *
 * # Safety
 * `factor` must be writable.
 */
LevoptStatus levopt_thermal_sensitivity(double index_ref, double index, double *factor);

/**
 * Message of the last failure on this thread, empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *levopt_last_error(void);

/**
 * Library version as a static string.
 */
const char *levopt_version(void);

/**
 * Pressure conversion helper for callers working in mbar.
 */
double levopt_mbar_to_pa(double pressure_mbar);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEVOPT_H */
