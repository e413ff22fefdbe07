/* Generated by cbindgen. Do not edit. */

#ifndef BIEN_H
#define BIEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BienStatus {
  BIEN_STATUS_OK = 0,
  BIEN_STATUS_NULL_ARGUMENT = 1,
  BIEN_STATUS_INVALID_UTF8 = 2,
  BIEN_STATUS_IO = 3,
  /*
   Malformed or inconsistent input data or model files.
   */
  BIEN_STATUS_DATA = 4,
  /*
   Impossible evidence or a numerical failure.
   */
  BIEN_STATUS_NUMERIC = 5,
  BIEN_STATUS_PANIC = 6,
} BienStatus;

/*
 Opaque handle to a loaded model.
 */
typedef struct BienExtractor BienExtractor;

/*
 One extracted slot. `start`/`end` are byte offsets into the input.
 */
typedef struct BienSlot {
  uint32_t field;
  size_t start;
  size_t end;
  /*
   Normalized filler, NUL-terminated.
   */
  char *text;
} BienSlot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Load a model directory. `lexicon_dir` may be null for the built-in
 lexicons. On success `*out` owns a handle for [`bien_extractor_free`].

 # Safety
 String arguments must be NUL-terminated; `out` must be writable.
 */
enum BienStatus bien_extractor_load(const char *model_dir,
                                    const char *lexicon_dir,
                                    struct BienExtractor **out);

/*
 # Safety
 `handle` must come from [`bien_extractor_load`] or be null.
 */
void bien_extractor_free(struct BienExtractor *handle);

/*
 Number of target fields of the model.

 # Safety
 `handle` must be a live handle; `out` must be writable.
 */
enum BienStatus bien_field_count(const struct BienExtractor *handle, size_t *out);

/*
 Name of field `index`, as a new string.

 # Safety
 `handle` must be a live handle; `out` must be writable.
 */
enum BienStatus bien_field_name(const struct BienExtractor *handle, size_t index, char **out);

/*
 Copy of `text` with `<field>` / `</field>` around each predicted slot.

 # Safety
 `handle` must be a live handle, `text` NUL-terminated, `out` writable.
 */
enum BienStatus bien_tag_text(const struct BienExtractor *handle, const char *text, char **out);

/*
 Predicted slots of `text`. `*slots` receives an array of `*len` entries
 (null when empty), released with [`bien_slots_free`].

 # Safety
 `handle` must be a live handle, `text` NUL-terminated, `slots` and `len`
 writable.
 */
enum BienStatus bien_extract(const struct BienExtractor *handle,
                             const char *text,
                             struct BienSlot **slots,
                             size_t *len);

/*
 # Safety
 `slots`/`len` must come from one [`bien_extract`] call, or be null/0.
 */
void bien_slots_free(struct BienSlot *slots, size_t len);

/*
 Field-level P(next slot field | last slot field) table as text.

 # Safety
 `handle` must be a live handle; `out` must be writable.
 */
enum BienStatus bien_cpt_report(const struct BienExtractor *handle, char **out);

/*
 # Safety
 `s` must come from this library or be null.
 */
void bien_string_free(char *s);

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *bien_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIEN_H */
