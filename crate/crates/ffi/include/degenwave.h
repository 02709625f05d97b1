#ifndef DEGENWAVE_H
#define DEGENWAVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DwStatus {
  DW_STATUS_OK = 0,
  DW_STATUS_CONFIG_ERROR = 1,
  DW_STATUS_HYPOTHESIS_VIOLATION = 2,
  DW_STATUS_NUMERICAL_FAILURE = 3,
  DW_STATUS_NULL_ARGUMENT = 4,
  DW_STATUS_INVALID_UTF8 = 5,
  DW_STATUS_PANIC = 6,
} DwStatus;

// Opaque scenario handle.
typedef struct DwScenario DwScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a TOML scenario. `base_dir` resolves relative table paths and may be null.
//
// # Safety
// `config_toml` and a non-null `base_dir` must be NUL-terminated strings;
// `out` must be writable.
enum DwStatus dw_scenario_new(const char *config_toml,
                              const char *base_dir,
                              struct DwScenario **out);

// # Safety
// `h` must come from `dw_scenario_new` and not be used afterwards. Null is ignored.
void dw_scenario_free(struct DwScenario *h);

// Degeneracy constant `K` and drift margin `eps0`. Either output may be null.
//
// # Safety
// `h` must be a live handle.
enum DwStatus dw_scenario_degeneracy(const struct DwScenario *h, double *k, double *eps0);

// Hypothesis report as JSON.
//
// # Safety
// `h` must be a live handle and `out` writable.
enum DwStatus dw_scenario_classify_json(const struct DwScenario *h, char **out);

// Function-space constants as JSON.
//
// # Safety
// `h` must be a live handle and `out` writable.
enum DwStatus dw_scenario_check_json(const struct DwScenario *h, char **out);

// Full stability report as JSON.
//
// # Safety
// `h` must be a live handle and `out` writable.
enum DwStatus dw_scenario_report_json(const struct DwScenario *h, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void dw_string_free(char *s);

// Message for the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *dw_last_error(void);

// Library version, static storage.
const char *dw_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEGENWAVE_H */
