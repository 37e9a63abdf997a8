#ifndef PAINTER_H
#define PAINTER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PainterStatus {
  PAINTER_STATUS_OK = 0,
  PAINTER_STATUS_NULL_ARGUMENT = 1,
  PAINTER_STATUS_INVALID_UTF8 = 2,
  PAINTER_STATUS_INVALID_ARGUMENT = 3,
  PAINTER_STATUS_SESSION_CLOSED = 4,
  PAINTER_STATUS_SESSION_OPEN = 5,
  PAINTER_STATUS_IMAGE = 6,
  PAINTER_STATUS_RENDER = 7,
  PAINTER_STATUS_INTERNAL = 8,
  PAINTER_STATUS_PANIC = 9,
} PainterStatus;

/**
 * Shared, immutable configuration: interview script, lexicon, style map.
 */
typedef struct PainterEngine PainterEngine;

/**
 * One sitter's interview.
 */
typedef struct PainterSession PainterSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next call into this library on the same thread.
 */
const char *painter_last_error(void);

/**
 * Creates an engine with the bundled script, lexicon and tables.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum PainterStatus painter_engine_new(struct PainterEngine **out);

/**
 * # Safety
 * `engine` must come from [`painter_engine_new`] and not be used afterwards.
 */
void painter_engine_free(struct PainterEngine *engine);

/**
 * Starts an interview. Writes the session handle and the greeting turn
 * as JSON.
 *
 * # Safety
 * Pointers must be valid; `engine` must outlive the session.
 */
enum PainterStatus painter_session_start(const struct PainterEngine *engine,
                                         struct PainterSession **out_session,
                                         char **out_turn_json);

/**
 * # Safety
 * `session` must come from [`painter_session_start`] and not be used
 * afterwards.
 */
void painter_session_free(struct PainterSession *session);

/**
 * Submits one sitter utterance. `emotion_hint` may be NULL.
 *
 * # Safety
 * Pointers must be valid; strings must be NUL-terminated.
 */
enum PainterStatus painter_session_turn(const struct PainterEngine *engine,
                                        struct PainterSession *session,
                                        const char *text,
                                        const char *emotion_hint,
                                        char **out_turn_json);

/**
 * 1 if the interview has closed, 0 if not, -1 for a NULL handle.
 *
 * # Safety
 * `session` must be a valid handle or NULL.
 */
int painter_session_is_closed(const struct PainterSession *session);

/**
 * Profile, cell and adjectives of a closed interview, as JSON.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PainterStatus painter_session_assess(const struct PainterEngine *engine,
                                          const struct PainterSession *session,
                                          char **out_json);

/**
 * Polarity score of `text` as JSON.
 *
 * # Safety
 * Pointers must be valid; `text` must be NUL-terminated.
 */
enum PainterStatus painter_score_text(const struct PainterEngine *engine,
                                      const char *text,
                                      char **out_json);

/**
 * Renders a PNG or JPEG portrait in the style of `cell` (`E+A+`,
 * `neutral`, ...). Writes a newly allocated PNG buffer and its length.
 *
 * # Safety
 * `image` must point to `image_len` readable bytes; out-pointers must be
 * valid.
 */
enum PainterStatus painter_render_png(const struct PainterEngine *engine,
                                      const uint8_t *image,
                                      size_t image_len,
                                      const char *cell,
                                      uint64_t seed,
                                      uint8_t **out_png,
                                      size_t *out_len);

/**
 * # Safety
 * `s` must come from this library, or be NULL.
 */
void painter_string_free(char *s);

/**
 * # Safety
 * `buf` and `len` must be exactly what [`painter_render_png`] returned.
 */
void painter_bytes_free(uint8_t *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAINTER_H */
