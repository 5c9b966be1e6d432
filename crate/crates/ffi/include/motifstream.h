#ifndef MOTIFSTREAM_H
#define MOTIFSTREAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_ARGUMENT = 2,
  MS_STATUS_PANIC = 3,
} MsStatus;

typedef enum MsKind {
  MS_KIND_FOUR_EST = 0,
  MS_KIND_TS4C1 = 1,
  MS_KIND_TS4C2 = 2,
  MS_KIND_ATS4C = 3,
  MS_KIND_TS5C = 4,
  MS_KIND_FIVE_EST = 5,
} MsKind;

/**
 * Opaque estimator handle.
 */
typedef struct MsEstimator MsEstimator;

/**
 * Opaque exact-count handle.
 */
typedef struct MsOracle MsOracle;

typedef struct MsCounts {
  uint64_t triangles;
  uint64_t cliques4;
  uint64_t cliques5;
} MsCounts;

/**
 * Resident triangle `triangle`, companion edges `companions`, closing edge `t6`.
 */
typedef struct MsTs4c1Input {
  uint64_t triangle[3];
  uint64_t companions[2];
  uint64_t t6;
  uint64_t edge_capacity;
  uint64_t triangle_capacity;
  uint64_t triangles_seen;
} MsTs4c1Input;

/**
 * T1 = {t1, t2, t4}, T2 = {t1, t3, t5}, closing edge `t6`.
 */
typedef struct MsTs4c2Input {
  uint64_t t[6];
  uint64_t edge_capacity;
  uint64_t triangle_capacity;
  uint64_t triangles_seen;
} MsTs4c2Input;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *ms_last_error(void);

/**
 * Creates an estimator. `kind` is an `MsKind` value; `edge_fraction <= 0`
 * selects the kind's default split.
 *
 * # Safety
 * `out_handle` must be a valid pointer to writable storage for one handle.
 */
enum MsStatus ms_estimator_new(uint32_t kind,
                               uint64_t memory,
                               double edge_fraction,
                               uint64_t seed,
                               struct MsEstimator **out_handle);

/**
 * # Safety
 * `h` must come from `ms_estimator_new` and not be used afterwards. Null is ignored.
 */
void ms_estimator_free(struct MsEstimator *h);

/**
 * Feeds one edge; writes the running estimate to `estimate` when non-null.
 *
 * # Safety
 * `h` must be a live handle; `estimate` null or writable.
 */
enum MsStatus ms_estimator_process_edge(struct MsEstimator *h,
                                        uint64_t u,
                                        uint64_t v,
                                        double *estimate);

/**
 * Feeds `n` edges from parallel arrays.
 *
 * # Safety
 * `h` must be a live handle; `us` and `vs` must each hold `n` values.
 */
enum MsStatus ms_estimator_process_edges(struct MsEstimator *h,
                                         const uint64_t *us,
                                         const uint64_t *vs,
                                         size_t n);

/**
 * # Safety
 * `h` must be a live handle; `estimate` writable.
 */
enum MsStatus ms_estimator_estimate(const struct MsEstimator *h, double *estimate);

/**
 * Number of non-loop edges processed so far.
 *
 * # Safety
 * `h` must be a live handle; `t` writable.
 */
enum MsStatus ms_estimator_time(const struct MsEstimator *h, uint64_t *t);

/**
 * # Safety
 * `out_handle` must be writable.
 */
enum MsStatus ms_oracle_new(struct MsOracle **out_handle);

/**
 * # Safety
 * `h` must come from `ms_oracle_new` and not be used afterwards. Null is ignored.
 */
void ms_oracle_free(struct MsOracle *h);

/**
 * Inserts an edge; `created` (if non-null) receives the cliques it closed.
 *
 * # Safety
 * `h` must be a live handle; `created` null or writable.
 */
enum MsStatus ms_oracle_insert_edge(struct MsOracle *h,
                                    uint64_t u,
                                    uint64_t v,
                                    struct MsCounts *created);

/**
 * # Safety
 * `h` must be a live handle; `counts` writable.
 */
enum MsStatus ms_oracle_counts(const struct MsOracle *h, struct MsCounts *counts);

/**
 * Probability that `k` fixed items of `t` are all in a size-`m` reservoir.
 *
 * # Safety
 * `p` must be writable.
 */
enum MsStatus ms_joint_inclusion(uint64_t k, uint64_t t, uint64_t m, double *p);

/**
 * # Safety
 * `p` must be writable.
 */
enum MsStatus ms_prob_fourest(uint64_t t6, uint64_t m, double *p);

/**
 * # Safety
 * `p` must be writable.
 */
enum MsStatus ms_prob_fiveest(uint64_t t10, uint64_t m, double *p);

/**
 * # Safety
 * `input` must be readable and `p` writable.
 */
enum MsStatus ms_prob_ts4c1(const struct MsTs4c1Input *input, double *p);

/**
 * # Safety
 * `input` must be readable and `p` writable.
 */
enum MsStatus ms_prob_ts4c2(const struct MsTs4c2Input *input, double *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOTIFSTREAM_H */
