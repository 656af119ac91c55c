#ifndef RALMC_H
#define RALMC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RalmcStatus {
  RALMC_STATUS_OK = 0,
  RALMC_STATUS_NULL_ARGUMENT = 1,
  RALMC_STATUS_INVALID_UTF8 = 2,
  RALMC_STATUS_SYNTAX = 3,
  RALMC_STATUS_INVALID_MODEL = 4,
  RALMC_STATUS_UNSUPPORTED = 5,
  RALMC_STATUS_UNKNOWN_NAME = 6,
  RALMC_STATUS_CHECK_FAILED = 7,
  RALMC_STATUS_PANIC = 8,
} RalmcStatus;

/**
 * Opaque handle to a parsed and validated model.
 */
typedef struct RalmcModel RalmcModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a model in `.rbm` text form. On success `*out` owns a new handle
 * that must be released with [`ralmc_model_free`].
 *
 * # Safety
 * `source` must be a nul-terminated string and `out` a valid pointer.
 */
enum RalmcStatus ralmc_model_parse(const char *source, struct RalmcModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must come from [`ralmc_model_parse`] and not be used afterwards.
 */
void ralmc_model_free(struct RalmcModel *model);

/**
 * Whether every agent can idle at zero cost everywhere.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
bool ralmc_model_is_irbm(const struct RalmcModel *model);

/**
 * Decides `formula` at `state` (null selects the initial state) with the
 * given endowment, writing the verdict to `*verdict`.
 *
 * # Safety
 * Strings must be nul-terminated, `model` a live handle, `verdict` valid.
 */
enum RalmcStatus ralmc_check(const struct RalmcModel *model,
                             const char *state,
                             uint64_t endowment,
                             const char *formula,
                             bool *verdict);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *ralmc_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RALMC_H */
