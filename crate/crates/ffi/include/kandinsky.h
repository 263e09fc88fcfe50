#ifndef KANDINSKY_H
#define KANDINSKY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KpStatus {
  KP_STATUS_OK = 0,
  KP_STATUS_NULL_POINTER = 1,
  KP_STATUS_INVALID_UTF8 = 2,
  KP_STATUS_PARSE_ERROR = 3,
  KP_STATUS_INVALID_JSON = 4,
  KP_STATUS_INVALID_FIGURE = 5,
  KP_STATUS_INVALID_UNIVERSE = 6,
  KP_STATUS_SAMPLE_FAILED = 7,
  KP_STATUS_RENDER_FAILED = 8,
  KP_STATUS_INVALID_ARGUMENT = 9,
  KP_STATUS_PANIC = 10,
} KpStatus;

/**
 * A figure: an ordered list of objects on the unit canvas.
 */
typedef struct KpFigure KpFigure;

/**
 * A parsed statement.
 */
typedef struct KpStatement KpStatement;

/**
 * A universe configuration.
 */
typedef struct KpUniverse KpUniverse;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *kp_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void kp_string_free(char *s);

/**
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum KpStatus kp_statement_parse(const char *text, struct KpStatement **out);

/**
 * # Safety
 * `s` must be NULL or a handle from [`kp_statement_parse`], not yet freed.
 */
void kp_statement_free(struct KpStatement *s);

/**
 * Truth value of the statement on the figure. `universe` may be NULL, in
 * which case the default universe's size threshold applies.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum KpStatus kp_statement_evaluate(const struct KpStatement *s,
                                    const struct KpFigure *f,
                                    const struct KpUniverse *universe,
                                    bool *out);

/**
 * English rendering of the statement.
 *
 * # Safety
 * `s` must be live; `out` must be writable.
 */
enum KpStatus kp_statement_render_text(const struct KpStatement *s, char **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum KpStatus kp_universe_default(struct KpUniverse **out);

/**
 * Universe from a JSON object; missing fields take their defaults.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum KpStatus kp_universe_from_json(const char *json, struct KpUniverse **out);

/**
 * # Safety
 * `u` must be NULL or a live universe handle.
 */
void kp_universe_free(struct KpUniverse *u);

/**
 * Figure from `{"objects": [...]}` JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum KpStatus kp_figure_from_json(const char *json, struct KpFigure **out);

/**
 * # Safety
 * `f` must be live; `out` must be writable.
 */
enum KpStatus kp_figure_to_json(const struct KpFigure *f, char **out);

/**
 * Number of objects, or 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or live.
 */
size_t kp_figure_len(const struct KpFigure *f);

/**
 * # Safety
 * `f` must be NULL or a live figure handle.
 */
void kp_figure_free(struct KpFigure *f);

/**
 * Checks the figure against the universe. `*ok` is false when any rule is
 * broken; the violations are then in the last error message.
 *
 * # Safety
 * Handles must be live; `ok` must be writable.
 */
enum KpStatus kp_figure_validate(const struct KpFigure *f, const struct KpUniverse *u, bool *ok);

/**
 * Samples one figure. The same (universe, seed, index) always yields the
 * same figure.
 *
 * # Safety
 * `u` must be live; `out` must be writable.
 */
enum KpStatus kp_figure_sample(const struct KpUniverse *u,
                               uint64_t seed,
                               uint64_t index,
                               struct KpFigure **out);

/**
 * SVG text of the figure on a `canvas_px` square canvas with the default
 * palette.
 *
 * # Safety
 * `f` must be live; `out` must be writable.
 */
enum KpStatus kp_render_svg(const struct KpFigure *f, uint32_t canvas_px, char **out);

/**
 * Chernoff divergence `1 - sum p^alpha q^(1-alpha)` between two weight
 * vectors over the same `len` keys. Weights are normalized first.
 *
 * # Safety
 * `p` and `q` must point to `len` readable doubles; `out` must be writable.
 */
enum KpStatus kp_chernoff_divergence(const double *p,
                                     const double *q,
                                     size_t len,
                                     double alpha,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KANDINSKY_H */
