#ifndef GSPEC_H
#define GSPEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GspecStatus {
  GSPEC_STATUS_OK = 0,
  GSPEC_STATUS_NULL_POINTER = 1,
  GSPEC_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed or inconsistent input text.
   */
  GSPEC_STATUS_PARSE_ERROR = 3,
  /**
   * Parsing finished without an analysis. A result is still returned.
   */
  GSPEC_STATUS_NO_PARSE = 4,
  /**
   * Parsing ran out of time. A result is still returned.
   */
  GSPEC_STATUS_TIMEOUT = 5,
  GSPEC_STATUS_INVALID_ARGUMENT = 6,
  GSPEC_STATUS_IO = 7,
  GSPEC_STATUS_PANIC = 8,
} GspecStatus;

typedef struct GspecGrammar GspecGrammar;

typedef struct GspecModel GspecModel;

typedef struct GspecResult GspecResult;

typedef struct GspecSpecialized GspecSpecialized;

/**
 * Options for [`gspec_parse_text`]. Obtain defaults from
 * [`gspec_parse_options_default`].
 */
typedef struct GspecParseOptions {
  bool prune;
  bool use_specialized;
  double fraction_phase1;
  double fraction_phase2;
  /**
   * Seconds; zero or less disables the limit.
   */
  double timeout_seconds;
} GspecParseOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *gspec_last_error(void);

const char *gspec_version(void);

/**
 * Parses a grammar file's text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GspecStatus gspec_grammar_from_str(const char *text, struct GspecGrammar **out);

/**
 * # Safety
 * `grammar` must come from [`gspec_grammar_from_str`] or be null.
 */
void gspec_grammar_free(struct GspecGrammar *grammar);

/**
 * Number of rules in the grammar, or 0 for a null handle.
 *
 * # Safety
 * `grammar` must be a live handle or null.
 */
size_t gspec_grammar_rule_count(const struct GspecGrammar *grammar);

/**
 * Parses a pruning model file's text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GspecStatus gspec_model_from_str(const char *text, struct GspecModel **out);

/**
 * # Safety
 * `model` must come from [`gspec_model_from_str`] or be null.
 */
void gspec_model_free(struct GspecModel *model);

/**
 * Parses a specialized grammar file's text. It must have been built from
 * `grammar`.
 *
 * # Safety
 * `text` must be a NUL-terminated string, `grammar` a live handle and `out`
 * a valid pointer.
 */
enum GspecStatus gspec_specialized_from_str(const char *text,
                                            const struct GspecGrammar *grammar,
                                            struct GspecSpecialized **out);

/**
 * # Safety
 * `sg` must come from [`gspec_specialized_from_str`] or be null.
 */
void gspec_specialized_free(struct GspecSpecialized *sg);

struct GspecParseOptions gspec_parse_options_default(void);

/**
 * Parses a whitespace-separated sentence. `model` and `specialized` may be
 * null unless the options ask for them; `options` may be null for defaults.
 * On `Ok`, `NoParse` and `Timeout` a result is stored in `out`.
 *
 * # Safety
 * Pointers must be null or valid as described; `out` must be valid.
 */
enum GspecStatus gspec_parse_text(const struct GspecGrammar *grammar,
                                  const struct GspecModel *model,
                                  const struct GspecSpecialized *specialized,
                                  const char *text,
                                  const struct GspecParseOptions *options,
                                  struct GspecResult **out);

/**
 * Number of analyses, or 0 for a null handle.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
size_t gspec_result_count(const struct GspecResult *result);

/**
 * The `index`-th analysis as a bracketed derivation, best first; null if
 * out of range. Owned by the result.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
const char *gspec_result_analysis(const struct GspecResult *result, size_t index);

/**
 * Score of the `index`-th analysis; NaN if out of range.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
double gspec_result_score(const struct GspecResult *result, size_t index);

/**
 * # Safety
 * `result` must come from [`gspec_parse_text`] or be null.
 */
void gspec_result_free(struct GspecResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSPEC_H */
