#ifndef YAMABE_H
#define YAMABE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum YamabeStatus {
  YAMABE_STATUS_OK = 0,
  YAMABE_STATUS_NULL_POINTER = 1,
  YAMABE_STATUS_INVALID_UTF8 = 2,
  YAMABE_STATUS_INVALID_ARGUMENT = 3,
  YAMABE_STATUS_INVALID_DOCUMENT = 4,
  YAMABE_STATUS_DOMAIN = 5,
  YAMABE_STATUS_NUMERICAL = 6,
  YAMABE_STATUS_PANIC = 7,
} YamabeStatus;

// Opaque certification report.
typedef struct YamabeReport YamabeReport;

// Opaque soliton specification.
typedef struct YamabeSpec YamabeSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *yamabe_last_error(void);

// Library version as a static string.
const char *yamabe_version(void);

// Parses a JSON spec document.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum YamabeStatus yamabe_spec_from_json(const char *json, struct YamabeSpec **out);

// Catalog example `k` in `1..=5`.
//
// # Safety
// `out` must be a valid pointer.
enum YamabeStatus yamabe_spec_example(uint32_t k, struct YamabeSpec **out);

// # Safety
// `spec` must come from this library and not be freed twice. NULL is ignored.
void yamabe_spec_free(struct YamabeSpec *spec);

// Certifies `spec` on `grid` points. A non-positive `tolerance` selects
// the default for the profile kind.
//
// # Safety
// `spec` must be a live handle and `out` a valid pointer.
enum YamabeStatus yamabe_certify(const struct YamabeSpec *spec,
                                 uintptr_t grid,
                                 double tolerance,
                                 struct YamabeReport **out);

// Verdict as its process exit code: 0 certified, 2 rejected, 3 inconclusive.
// Returns -1 for NULL.
//
// # Safety
// `report` must be a live handle or NULL.
int yamabe_report_verdict(const struct YamabeReport *report);

// Report as JSON. Release the string with [`yamabe_string_free`].
//
// # Safety
// `report` must be a live handle. Returns NULL for NULL input.
char *yamabe_report_json(const struct YamabeReport *report);

// # Safety
// `report` must come from this library and not be freed twice. NULL is ignored.
void yamabe_report_free(struct YamabeReport *report);

// # Safety
// `s` must come from this library and not be freed twice. NULL is ignored.
void yamabe_string_free(char *s);

// Lambert W. `branch` 0 is the principal branch, -1 the lower one.
//
// # Safety
// `out` must be a valid pointer.
enum YamabeStatus yamabe_lambert_w(double x, int branch, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* YAMABE_H */
