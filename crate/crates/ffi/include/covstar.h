#ifndef COVSTAR_H
#define COVSTAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CovstarStatus {
  COVSTAR_STATUS_OK = 0,
  /**
   * Null pointer or a string that is not UTF-8.
   */
  COVSTAR_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed chart, form or expression text.
   */
  COVSTAR_STATUS_INPUT = 2,
  /**
   * A constraint or premise the operation needs does not hold.
   */
  COVSTAR_STATUS_PRECONDITION = 3,
  /**
   * Operation not available in the chart's mode.
   */
  COVSTAR_STATUS_MODE = 4,
  COVSTAR_STATUS_UNSUPPORTED_ORDER = 5,
  /**
   * Operands of incompatible dimension or shape.
   */
  COVSTAR_STATUS_SHAPE = 6,
  /**
   * Internal panic, caught at the boundary.
   */
  COVSTAR_STATUS_PANIC = 7,
} CovstarStatus;

/**
 * Opaque chart handle.
 */
typedef struct CovstarChart CovstarChart;

/**
 * Opaque tensor-valued form handle.
 */
typedef struct CovstarForm CovstarForm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread; do not free.
 */
const char *covstar_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void covstar_string_free(char *s);

/**
 * Parses a chart from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum CovstarStatus covstar_chart_from_json(const char *json, struct CovstarChart **out);

/**
 * Loads a built-in fixture chart by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` a valid pointer.
 */
enum CovstarStatus covstar_chart_fixture(const char *name, struct CovstarChart **out);

/**
 * # Safety
 * `c` must be null or a chart handle from this library, freed once.
 */
void covstar_chart_free(struct CovstarChart *c);

/**
 * Dimension of the chart, 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live chart handle.
 */
size_t covstar_chart_dimension(const struct CovstarChart *c);

/**
 * Runs the constraint suite. Writes the report JSON to `out_json` and
 * whether the chart is admissible to `admissible`.
 *
 * # Safety
 * `c` must be a live chart handle; outputs must be valid pointers.
 */
enum CovstarStatus covstar_chart_check(const struct CovstarChart *c,
                                       bool *admissible,
                                       char **out_json);

/**
 * Parses a form in the form-file JSON format for the chart's dimension.
 *
 * # Safety
 * `c` must be a live chart handle, `json` NUL-terminated, `out` valid.
 */
enum CovstarStatus covstar_form_from_json(const struct CovstarChart *c,
                                          const char *json,
                                          struct CovstarForm **out);

/**
 * # Safety
 * `f` must be a live form handle; `out` a valid pointer.
 */
enum CovstarStatus covstar_form_to_json(const struct CovstarForm *f, char **out);

/**
 * # Safety
 * `f` must be null or a form handle from this library, freed once.
 */
void covstar_form_free(struct CovstarForm *f);

/**
 * Poisson bracket `{a, b}` as a new form.
 *
 * # Safety
 * Handles must be live; `out` a valid pointer.
 */
enum CovstarStatus covstar_bracket(const struct CovstarChart *c,
                                   const struct CovstarForm *a,
                                   const struct CovstarForm *b,
                                   struct CovstarForm **out);

/**
 * Star product coefficient `C_n(a, b)` as a new form.
 *
 * # Safety
 * Handles must be live; `out` a valid pointer.
 */
enum CovstarStatus covstar_star_coefficient(const struct CovstarChart *c,
                                            const struct CovstarForm *a,
                                            const struct CovstarForm *b,
                                            size_t n,
                                            struct CovstarForm **out);

/**
 * Star product through `hbar^order` as a JSON array of forms.
 *
 * # Safety
 * Handles must be live; `out` a valid pointer.
 */
enum CovstarStatus covstar_star_json(const struct CovstarChart *c,
                                     const struct CovstarForm *a,
                                     const struct CovstarForm *b,
                                     size_t order,
                                     char **out);

/**
 * Runs a seeded trial suite without timing fields. `exit_code` receives
 * 0 (passed), 1 (a trial failed) or 3 (a prerequisite failed).
 *
 * # Safety
 * `c` must be a live chart handle, `suite` NUL-terminated, outputs valid.
 */
enum CovstarStatus covstar_verify(const struct CovstarChart *c,
                                  const char *suite,
                                  uint64_t seed,
                                  size_t trials,
                                  int32_t *exit_code,
                                  char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVSTAR_H */
