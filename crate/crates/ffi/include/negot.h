#ifndef NEGOT_H
#define NEGOT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum NegotStatus {
  NEGOT_STATUS_OK = 0,
  NEGOT_STATUS_NULL_ARGUMENT = 1,
  NEGOT_STATUS_INVALID_UTF8 = 2,
  NEGOT_STATUS_PARSE_ERROR = 3,
  NEGOT_STATUS_INVALID_ARGUMENT = 4,
  NEGOT_STATUS_UNSOUND = 5,
  NEGOT_STATUS_INCONCLUSIVE = 6,
  NEGOT_STATUS_ENGINE_ERROR = 7,
  NEGOT_STATUS_FRAMEWORK_ERROR = 8,
  NEGOT_STATUS_PANIC = 9,
} NegotStatus;

typedef enum NegotSoundness {
  NEGOT_SOUNDNESS_SOUND = 0,
  NEGOT_SOUNDNESS_UNSOUND = 1,
  NEGOT_SOUNDNESS_LIMIT_EXCEEDED = 2,
} NegotSoundness;

/**
 * A parsed, validated diagram.
 */
typedef struct NegotDiagram NegotDiagram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static NUL-terminated string.
 */
const char *negot_version(void);

/**
 * The message of the last failed call on this thread, or NULL. Valid until
 * the next call into the library on the same thread.
 */
const char *negot_last_error(void);

/**
 * Parses diagram source text. On success `*out` receives a handle to be
 * released with `negot_diagram_free`.
 *
 * # Safety
 * `text` must be NULL or a NUL-terminated string; `out` must be NULL or
 * point to writable storage for one pointer.
 */
enum NegotStatus negot_diagram_parse(const char *text, struct NegotDiagram **out);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `d` must be NULL or a handle from `negot_diagram_parse` not yet freed.
 */
void negot_diagram_free(struct NegotDiagram *d);

/**
 * Number of nodes, or 0 for a NULL handle.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
size_t negot_diagram_node_count(const struct NegotDiagram *d);

/**
 * Number of processes, or 0 for a NULL handle.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
size_t negot_diagram_process_count(const struct NegotDiagram *d);

/**
 * Determinism and soundness. `max_configs` 0 selects the default cap.
 * Either output pointer may be NULL.
 *
 * # Safety
 * `d` must be a live handle; non-NULL outputs must be writable.
 */
enum NegotStatus negot_check(const struct NegotDiagram *d,
                             size_t max_configs,
                             int *deterministic,
                             enum NegotSoundness *soundness);

/**
 * Runs an analysis and writes the JSON report to `*out_json`.
 *
 * `framework` is `expected-cost`, `worst-time` or `genkill`; NULL uses the
 * diagram's first analysis block. `params` holds `key=value` pairs
 * separated by `;` (e.g. `variant=may-forward;gen=n3.b;loc=n7.a`) and may
 * be NULL. The report is written whenever the request itself was valid,
 * even if the analysis failed; the status then says why.
 *
 * # Safety
 * `d` must be a live handle; strings must be NULL or NUL-terminated;
 * `out_json` must point to writable storage for one pointer.
 */
enum NegotStatus negot_analyze_json(const struct NegotDiagram *d,
                                    const char *framework,
                                    const char *params,
                                    int oracle_check,
                                    char **out_json);

/**
 * Graphviz rendering of the diagram.
 *
 * # Safety
 * `d` must be a live handle; `out` must point to writable storage.
 */
enum NegotStatus negot_diagram_to_dot(const struct NegotDiagram *d, char **out);

/**
 * Canonical source text of the diagram.
 *
 * # Safety
 * `d` must be a live handle; `out` must point to writable storage.
 */
enum NegotStatus negot_diagram_render(const struct NegotDiagram *d, char **out);

/**
 * Releases a string returned by the library; NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void negot_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEGOT_H */
