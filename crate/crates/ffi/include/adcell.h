#ifndef ADCELL_H
#define ADCELL_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AdcellOracle {
  ADCELL_ORACLE_OFFLINE = 0,
  ADCELL_ORACLE_EXPECTED_OFFLINE = 1,
  ADCELL_ORACLE_ONLINE = 2,
} AdcellOracle;

typedef enum AdcellPolicy {
  ADCELL_POLICY_IPB = 0,
  ADCELL_POLICY_IPC = 1,
  ADCELL_POLICY_IPBC = 2,
  ADCELL_POLICY_OFFLINE_ROUND = 3,
} AdcellPolicy;

/**
 * Result code of every fallible call.
 */
typedef enum AdcellStatus {
  ADCELL_STATUS_OK = 0,
  ADCELL_STATUS_NULL_POINTER = 1,
  ADCELL_STATUS_INVALID_UTF8 = 2,
  ADCELL_STATUS_INVALID_INPUT = 3,
  ADCELL_STATUS_SIZE_GUARD = 4,
  ADCELL_STATUS_INVARIANT_VIOLATION = 5,
  ADCELL_STATUS_PANIC = 6,
} AdcellStatus;

typedef enum AdcellVariant {
  ADCELL_VARIANT_BUDGET = 0,
  ADCELL_VARIANT_CAPACITY = 1,
  ADCELL_VARIANT_BUDGET_CAPACITY = 2,
} AdcellVariant;

/**
 * Opaque instance handle.
 */
typedef struct AdcellInstance AdcellInstance;

/**
 * Opaque scenario handle.
 */
typedef struct AdcellScenario AdcellScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *adcell_last_error(void);

/**
 * # Safety
 * `text` must be null or a string returned by this library, not yet freed.
 */
void adcell_string_free(char *text);

/**
 * Parses and validates an instance from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AdcellStatus adcell_instance_from_json(const char *json, struct AdcellInstance **out);

/**
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum AdcellStatus adcell_instance_to_json(const struct AdcellInstance *inst, char **out);

/**
 * # Safety
 * `inst` must be null or a handle from this library, not yet freed.
 */
void adcell_instance_free(struct AdcellInstance *inst);

/**
 * Number of advertisers, queries and customers; any output may be null.
 *
 * # Safety
 * `inst` must be a live handle; non-null outputs must be writable.
 */
enum AdcellStatus adcell_instance_dims(const struct AdcellInstance *inst,
                                       size_t *advertisers,
                                       size_t *queries,
                                       size_t *customers);

/**
 * Draws one arrival pattern with the trial generator for `(seed, 0)`.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum AdcellStatus adcell_scenario_sample(const struct AdcellInstance *inst,
                                         uint64_t seed,
                                         struct AdcellScenario **out);

/**
 * Parses a scenario and checks it against `inst`.
 *
 * # Safety
 * `inst` must be a live handle, `json` a NUL-terminated string, `out` writable.
 */
enum AdcellStatus adcell_scenario_from_json(const struct AdcellInstance *inst,
                                            const char *json,
                                            struct AdcellScenario **out);

/**
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum AdcellStatus adcell_scenario_to_json(const struct AdcellScenario *scenario, char **out);

/**
 * # Safety
 * `scenario` must be null or a handle from this library, not yet freed.
 */
void adcell_scenario_free(struct AdcellScenario *scenario);

/**
 * Exact optimum of the chosen relaxation as rational text such as `"9/5"`.
 * A null `scenario` selects the expectation form. An infeasible program
 * yields `InvariantViolation`.
 *
 * # Safety
 * `inst` must be a live handle, `scenario` null or live, `out` writable.
 */
enum AdcellStatus adcell_lp_objective(const struct AdcellInstance *inst,
                                      enum AdcellVariant variant,
                                      const struct AdcellScenario *scenario,
                                      char **out);

/**
 * Solves the realized program for `scenario`, rounds it with `seed`, and
 * writes a JSON object with `revenue`, `realized_lp`, `approx_bound` and
 * the `assignment` as `[query, advertiser]` pairs.
 *
 * # Safety
 * `inst` and `scenario` must be live handles; `out` must be writable.
 */
enum AdcellStatus adcell_round_offline(const struct AdcellInstance *inst,
                                       const struct AdcellScenario *scenario,
                                       uint64_t seed,
                                       char **out);

/**
 * Monte Carlo evaluation; writes the report as JSON.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum AdcellStatus adcell_simulate(const struct AdcellInstance *inst,
                                  enum AdcellPolicy policy,
                                  uint64_t trials,
                                  uint64_t seed,
                                  char **out);

/**
 * Exact oracle value as rational text. `Offline` needs a scenario; the
 * others ignore it.
 *
 * # Safety
 * `inst` must be a live handle, `scenario` null or live, `out` writable.
 */
enum AdcellStatus adcell_oracle(const struct AdcellInstance *inst,
                                enum AdcellOracle which,
                                const struct AdcellScenario *scenario,
                                char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADCELL_H */
