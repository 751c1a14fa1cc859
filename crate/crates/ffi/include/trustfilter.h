#ifndef TRUSTFILTER_H
#define TRUSTFILTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TfStatus {
  TF_STATUS_OK = 0,
  TF_STATUS_NULL_POINTER = 1,
  TF_STATUS_OUT_OF_RANGE = 2,
  TF_STATUS_EMPTY_INPUT = 3,
  TF_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The caller's buffer is shorter than the result; the required length
   * has been written to `out_len`.
   */
  TF_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Nothing survived filtering, so there is no trust value.
   */
  TF_STATUS_NO_RATING = 6,
  TF_STATUS_INTERNAL = 7,
} TfStatus;

typedef enum TfFilterKind {
  TF_FILTER_KIND_DEVIATION = 0,
  TF_FILTER_KIND_QUARTILE = 1,
  TF_FILTER_KIND_CHART = 2,
  TF_FILTER_KIND_ITERATIVE = 3,
} TfFilterKind;

/**
 * Opaque recommendation set.
 */
typedef struct TfRecommendationSet TfRecommendationSet;

/**
 * Opaque filter verdict.
 */
typedef struct TfVerdict TfVerdict;

/**
 * Baseline filter parameters. Obtain defaults from [`tf_baseline_params_default`].
 */
typedef struct TfBaselineParams {
  double quartile_q;
  double chart_k;
  double iterative_s;
  size_t iterative_max_rounds;
} TfBaselineParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *tf_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tf_version(void);

struct TfBaselineParams tf_baseline_params_default(void);

/**
 * Copies `len` values in `[0, 1]` into a new set stored in `*out`.
 *
 * # Safety
 * `values` must point to `len` readable doubles (it may be null when `len`
 * is 0) and `out` must be a valid pointer.
 */
enum TfStatus tf_recommendation_set_new(const double *values,
                                        size_t len,
                                        struct TfRecommendationSet **out);

/**
 * Number of values in the set; 0 for null.
 *
 * # Safety
 * `set` must be null or a live handle from [`tf_recommendation_set_new`].
 */
size_t tf_recommendation_set_len(const struct TfRecommendationSet *set);

/**
 * # Safety
 * `set` must be null or a handle from [`tf_recommendation_set_new`] not yet freed.
 */
void tf_recommendation_set_free(struct TfRecommendationSet *set);

/**
 * Runs a filter over `set`. `params` may be null for the defaults; the
 * deviation filter ignores it.
 *
 * # Safety
 * `set` must be a live set handle, `params` null or valid, `out` valid.
 */
enum TfStatus tf_filter_run(const struct TfRecommendationSet *set,
                            enum TfFilterKind kind,
                            const struct TfBaselineParams *params,
                            struct TfVerdict **out);

/**
 * Deviation filter measured from a fixed `reference` instead of the median.
 *
 * # Safety
 * As [`tf_filter_run`].
 */
enum TfStatus tf_deviation_run_with_reference(const struct TfRecommendationSet *set,
                                              double reference,
                                              struct TfVerdict **out);

/**
 * Mean of the surviving values, or `NoRating` when none survived.
 *
 * # Safety
 * `verdict` must be a live verdict handle and `out` valid.
 */
enum TfStatus tf_verdict_trust(const struct TfVerdict *verdict, double *out);

/**
 * # Safety
 * `verdict` must be null or a live verdict handle.
 */
size_t tf_verdict_surviving_count(const struct TfVerdict *verdict);

/**
 * # Safety
 * `verdict` must be null or a live verdict handle.
 */
size_t tf_verdict_removed_count(const struct TfVerdict *verdict);

/**
 * Writes the dishonest class values (ascending) into `buf`. Always writes
 * the count to `*out_len`. Baseline verdicts have no classes.
 *
 * # Safety
 * `verdict` must be a live verdict handle, `buf` must hold `cap` doubles
 * (null allowed when `cap` is 0) and `out_len` must be valid.
 */
enum TfStatus tf_verdict_dishonest_classes(const struct TfVerdict *verdict,
                                           double *buf,
                                           size_t cap,
                                           size_t *out_len);

/**
 * Writes 1 for each removed input position and 0 otherwise, in input order.
 *
 * # Safety
 * As [`tf_verdict_dishonest_classes`], with a byte buffer.
 */
enum TfStatus tf_verdict_removed_mask(const struct TfVerdict *verdict,
                                      uint8_t *buf,
                                      size_t cap,
                                      size_t *out_len);

/**
 * # Safety
 * `verdict` must be null or a verdict handle not yet freed.
 */
void tf_verdict_free(struct TfVerdict *verdict);

/**
 * Squared distance of `class_value` from `reference` divided by `frequency`.
 *
 * # Safety
 * `out` must be valid.
 */
enum TfStatus tf_dissimilarity(double class_value, size_t frequency, double reference, double *out);

/**
 * Matthews correlation coefficient with dishonest as the positive class.
 */
double tf_mcc(uint64_t tp, uint64_t tn, uint64_t fp, uint64_t fn_);

double tf_fpr(uint64_t tp, uint64_t tn, uint64_t fp, uint64_t fn_);

double tf_fnr(uint64_t tp, uint64_t tn, uint64_t fp, uint64_t fn_);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRUSTFILTER_H */
