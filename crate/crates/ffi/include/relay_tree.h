#ifndef RELAY_TREE_H
#define RELAY_TREE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Hypothesis selector for [`rt_simulate`]: true message is 0.
 */
#define RT_HYPOTHESIS_H0 0

/*
 Hypothesis selector for [`rt_simulate`]: true message is 1.
 */
#define RT_HYPOTHESIS_H1 1

/*
 Position of a pair relative to `alpha + beta = 1` and the diagonal.
 */
typedef enum RtSide {
  RT_SIDE_UPPER_TRIANGLE = 0,
  RT_SIDE_LOWER_TRIANGLE = 1,
  RT_SIDE_DIAGONAL_SUM1 = 2,
  RT_SIDE_BEYOND_SUM1 = 3,
} RtSide;

/*
 Status codes returned by every fallible function.
 */
typedef enum RtStatus {
  RT_STATUS_OK = 0,
  RT_STATUS_NULL_POINTER = 1,
  RT_STATUS_INVALID_PROBABILITY = 2,
  RT_STATUS_NOT_IN_TRIANGLE = 3,
  RT_STATUS_INDEX_OVERFLOW = 4,
  RT_STATUS_NO_ENTRY = 5,
  RT_STATUS_NO_CONVERGENCE = 6,
  RT_STATUS_NOT_POWER_OF_TWO = 7,
  RT_STATUS_HEIGHT_PARITY = 8,
  RT_STATUS_INVALID_BAND = 9,
  RT_STATUS_NOT_IN_R = 10,
  RT_STATUS_REGION_INCONSISTENT = 11,
  RT_STATUS_INVALID_ARGUMENT = 12,
  RT_STATUS_OUT_OF_RANGE = 13,
  RT_STATUS_PANIC = 14,
} RtStatus;

/*
 Which bound formula was dispatched.
 */
typedef enum RtTheorem {
  RT_THEOREM_COROLLARY1 = 0,
  RT_THEOREM_THEOREM1 = 1,
  RT_THEOREM_THEOREM2 = 2,
  RT_THEOREM_THEOREM3_EVEN_VISIT = 3,
  RT_THEOREM_THEOREM3_ODD_VISIT = 4,
  RT_THEOREM_THEOREM4_ODD_GAP = 5,
  RT_THEOREM_THEOREM4_EVEN_GAP = 6,
} RtTheorem;

/*
 Opaque handle to a computed trajectory.
 */
typedef struct RtTrajectory RtTrajectory;

/*
 Region classification. `b_index` is 0 when the band index is undefined.
 */
typedef struct RtRegionTag {
  enum RtSide side;
  uint32_t b_index;
  bool in_r;
  bool in_s;
  bool above_diagonal;
} RtRegionTag;

/*
 One level of a trajectory.
 */
typedef struct RtState {
  uint32_t level;
  double alpha;
  double beta;
  double log2_alpha;
  double log2_beta;
  double log2_l;
  struct RtRegionTag tag;
} RtState;

/*
 Dispatched bounds on `log2 P_N^-1` next to the exact value. `m` is 0
 when no band index applies.
 */
typedef struct RtBounds {
  double exact;
  double lower;
  double lower_clamped;
  double upper;
  double log2_l0;
  enum RtTheorem theorem;
  uint32_t height;
  uint32_t m;
  bool ok;
} RtBounds;

/*
 Monte Carlo error-rate estimate.
 */
typedef struct RtMcEstimate {
  double error_rate;
  uint64_t errors;
  uint64_t trials;
  double std_err;
  double predicted;
  double z;
} RtMcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Static description of a status code. Takes a plain integer so that
 unknown codes are safe to pass. Never null.
 */
const char *rt_status_message(int32_t status);

/*
 Detailed text of the last error on this thread, empty after a success.
 Valid until the next call into this library from the same thread.
 */
const char *rt_last_error_message(void);

/*
 One fusion step `(alpha, beta) -> f(alpha, beta)`.

 # Safety
 `out_alpha` and `out_beta` must be null or valid for writes.
 */
enum RtStatus rt_fuse(double alpha, double beta, double *out_alpha, double *out_beta);

/*
 Region classification of `(alpha, beta)`.

 # Safety
 `out` must be null or valid for writes.
 */
enum RtStatus rt_classify(double alpha, double beta, struct RtRegionTag *out);

/*
 Computes levels `0..=levels` from `(alpha0, beta0)`. Release the handle
 with [`rt_trajectory_free`].

 # Safety
 `out` must be null or valid for writes.
 */
enum RtStatus rt_trajectory_new(double alpha0,
                                double beta0,
                                uint32_t levels,
                                struct RtTrajectory **out);

/*
 Number of states, `levels + 1`. Zero for a null handle.

 # Safety
 `t` must be null or a live handle from [`rt_trajectory_new`].
 */
size_t rt_trajectory_len(const struct RtTrajectory *t);

/*
 Copies state `index` into `out`.

 # Safety
 `t` must be null or a live handle; `out` must be null or valid for writes.
 */
enum RtStatus rt_trajectory_state(const struct RtTrajectory *t, size_t index, struct RtState *out);

/*
 Releases a trajectory. Null is a no-op.

 # Safety
 `t` must be null or a handle from [`rt_trajectory_new`] not yet freed.
 */
void rt_trajectory_free(struct RtTrajectory *t);

/*
 Exact `log2 P_N^-1` for a tree of the given height with the dispatched
 bounds around it.

 # Safety
 `out` must be null or valid for writes.
 */
enum RtStatus rt_sandwich_check(double alpha0, double beta0, uint32_t height, struct RtBounds *out);

/*
 Smallest height whose total error `P_N` is at most `epsilon`.

 # Safety
 `out_height` must be null or valid for writes.
 */
enum RtStatus rt_min_sensors(double alpha0, double beta0, double epsilon, uint32_t *out_height);

/*
 Monte Carlo estimate of the root error rate. `hypothesis` is
 [`RT_HYPOTHESIS_H0`] or [`RT_HYPOTHESIS_H1`]. Results depend only on the
 arguments, not on the thread count.

 # Safety
 `out` must be null or valid for writes.
 */
enum RtStatus rt_simulate(double alpha0,
                          double beta0,
                          uint32_t height,
                          uint64_t trials,
                          uint64_t seed,
                          uint32_t hypothesis,
                          struct RtMcEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELAY_TREE_H */
