#ifndef NANOLOG_H
#define NANOLOG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum NlStatus {
  NL_STATUS_OK = 0,
  NL_STATUS_NULL_POINTER = 1,
  NL_STATUS_INVALID_UTF8 = 2,
  NL_STATUS_PARSE_ERROR = 3,
  NL_STATUS_INVALID_OPTION = 4,
  NL_STATUS_UNIFICATION_FAILED = 5,
  NL_STATUS_NODE_NOT_OPEN = 6,
  NL_STATUS_BAD_PATH = 7,
  NL_STATUS_EMPTY_HISTORY = 8,
  NL_STATUS_INVALID_VARIABLE = 9,
  NL_STATUS_BUDGET_EXHAUSTED = 10,
  NL_STATUS_BAD_INDEX = 11,
  NL_STATUS_PANIC = 99,
} NlStatus;

typedef enum NlStrategy {
  NL_STRATEGY_DFS = 0,
  NL_STRATEGY_BFS = 1,
  NL_STRATEGY_IDDFS = 2,
} NlStrategy;

/**
 * A parsed program.
 */
typedef struct NlProgram NlProgram;

/**
 * An interactive proof.
 */
typedef struct NlProof NlProof;

typedef struct NlSolveOptions {
  /**
   * One of the `NlStrategy` values.
   */
  uint32_t strategy;
  uint32_t max_depth;
  uint32_t max_solutions;
  uint64_t step_budget;
  /**
   * Wall-clock limit in milliseconds; 0 for none.
   */
  uint64_t time_limit_ms;
} NlSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *nl_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void nl_string_free(char *s);

struct NlSolveOptions nl_solve_options_default(void);

/**
 * Parses a whole program.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NlStatus nl_program_parse(const char *src, struct NlProgram **out);

/**
 * # Safety
 * `p` must come from [`nl_program_parse`] and not be used afterwards.
 */
void nl_program_free(struct NlProgram *p);

/**
 * Number of rules, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live program handle.
 */
size_t nl_program_len(const struct NlProgram *p);

/**
 * Parses one rule and appends it.
 *
 * # Safety
 * `p` must be a live program handle and `rule` a NUL-terminated string.
 */
enum NlStatus nl_program_add_rule(struct NlProgram *p, const char *rule);

/**
 * Canonical listing of the program, one rule per line.
 *
 * # Safety
 * `p` must be a live program handle and `out` a valid pointer.
 */
enum NlStatus nl_program_to_string(const struct NlProgram *p, char **out);

/**
 * Runs `query` and writes the JSON query response (the same document the
 * HTTP service returns) to `out`. `opts` may be null for the defaults.
 *
 * # Safety
 * `p` must be a live program handle, `query` a NUL-terminated string,
 * `opts` null or valid, and `out` a valid pointer.
 */
enum NlStatus nl_solve_json(const struct NlProgram *p,
                            const char *query,
                            const struct NlSolveOptions *opts,
                            char **out);

/**
 * Starts a proof of `goal`.
 *
 * # Safety
 * `goal` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NlStatus nl_proof_new(const char *goal, struct NlProof **out);

/**
 * # Safety
 * `proof` must come from [`nl_proof_new`] and not be used afterwards.
 */
void nl_proof_free(struct NlProof *proof);

/**
 * Applies rule `rule_index` of `program` to the node reached by following
 * `path` (child indices from the root). `path` may be null when
 * `path_len` is 0.
 *
 * # Safety
 * `proof` and `program` must be live handles and `path` must point to
 * `path_len` readable elements.
 */
enum NlStatus nl_proof_apply(struct NlProof *proof,
                             const size_t *path,
                             size_t path_len,
                             const struct NlProgram *program,
                             size_t rule_index);

/**
 * Binds variable `var` to the term `term` across the whole proof.
 *
 * # Safety
 * `proof` must be a live handle; `var` and `term` NUL-terminated strings.
 */
enum NlStatus nl_proof_substitute(struct NlProof *proof, const char *var, const char *term);

/**
 * # Safety
 * `proof` must be a live handle.
 */
enum NlStatus nl_proof_undo(struct NlProof *proof);

/**
 * True when every goal in the proof is closed. False for a null handle.
 *
 * # Safety
 * `proof` must be null or a live handle.
 */
bool nl_proof_is_complete(const struct NlProof *proof);

/**
 * The proof as JSON, in the shape the HTTP service uses.
 *
 * # Safety
 * `proof` must be a live handle and `out` a valid pointer.
 */
enum NlStatus nl_proof_tree_json(const struct NlProof *proof, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NANOLOG_H */
