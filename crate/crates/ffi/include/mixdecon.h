#ifndef MIXDECON_H
#define MIXDECON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MdStatus {
  MD_STATUS_OK = 0,
  MD_STATUS_NULL_POINTER = 1,
  MD_STATUS_INVALID_UTF8 = 2,
  MD_STATUS_DOMAIN = 3,
  MD_STATUS_STRUCTURAL = 4,
  MD_STATUS_UNSUPPORTED = 5,
  MD_STATUS_MUST_REGULARIZE = 6,
  MD_STATUS_NUMERIC = 7,
  MD_STATUS_CONFIG = 8,
  MD_STATUS_IO = 9,
  MD_STATUS_OUT_OF_RANGE = 10,
  MD_STATUS_PANIC = 11,
} MdStatus;

/**
 * Scaled flat-top kernel handle.
 */
typedef struct MdKernel MdKernel;

/**
 * Noise model handle.
 */
typedef struct MdNoise MdNoise;

/**
 * Bandwidth plan together with its transfer function.
 */
typedef struct MdPlan MdPlan;

/**
 * Finished rate study.
 */
typedef struct MdStudy MdStudy;

typedef struct MdPlanInfo {
  double b;
  double m;
  double m_n;
  double v_n;
  double delta;
  double zeta;
  /**
   * Regions materialized around roots of the noise transform.
   */
  size_t regions;
} MdPlanInfo;

typedef struct MdSummaryRow {
  uint64_t n;
  double a_n;
  double median;
  double mean;
  double bound;
  double ratio;
} MdSummaryRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next `md_*` call on the same thread.
 */
const char *md_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *md_version(void);

/**
 * Parses a noise spec such as `"uniform(m=1)"` in dimension `d`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MdStatus md_noise_new(const char *spec, size_t d, struct MdNoise **out);

/**
 * `h̃(t)` along the first axis.
 *
 * # Safety
 * `noise` must come from [`md_noise_new`]; `re` and `im` must be valid.
 */
enum MdStatus md_noise_htilde(const struct MdNoise *noise, double t, double *re, double *im);

/**
 * # Safety
 * `noise` must come from [`md_noise_new`] or be null.
 */
void md_noise_free(struct MdNoise *noise);

/**
 * Flat-top kernel with half-band `half_band`, flat fraction `rho` and leg
 * order `leg`, scaled to bandwidth `b`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MdStatus md_kernel_new(size_t d,
                            double half_band,
                            double rho,
                            uint32_t leg,
                            double b,
                            struct MdKernel **out);

/**
 * `K̃_n(t)` at a point of dimension `d` given by `t[0..d]`.
 *
 * # Safety
 * `t` must point to `d` doubles matching the kernel dimension.
 */
enum MdStatus md_kernel_transform(const struct MdKernel *kernel,
                                  const double *t,
                                  size_t d,
                                  double *out);

/**
 * `K_n * p̂` for a one-dimensional `p̂` sampled at `lo + k·dx`, `k < n`.
 * The grid must resolve the kernel band and leave room for its tails.
 *
 * # Safety
 * `values` and `out` must each point to `n` doubles.
 */
enum MdStatus md_smoothed_estimate(const struct MdKernel *kernel,
                                   const double *values,
                                   size_t n,
                                   double lo,
                                   double dx,
                                   double *out);

/**
 * # Safety
 * `kernel` must come from [`md_kernel_new`] or be null.
 */
void md_kernel_free(struct MdKernel *kernel);

/**
 * Plan for rate `a_n` and a target of Hölder order `qtilde` (constant 1),
 * with its regularized transfer.
 *
 * # Safety
 * `noise` must come from [`md_noise_new`]; `out` must be valid.
 */
enum MdStatus md_plan_select(const struct MdNoise *noise,
                             double a_n,
                             double qtilde,
                             double half_band,
                             double xi,
                             struct MdPlan **out);

/**
 * # Safety
 * `plan` must come from [`md_plan_select`]; `out` must be valid.
 */
enum MdStatus md_plan_info(const struct MdPlan *plan, struct MdPlanInfo *out);

/**
 * `h̃_n*(t)` along the first axis.
 *
 * # Safety
 * `plan` must come from [`md_plan_select`]; `re` and `im` must be valid.
 */
enum MdStatus md_plan_transfer(const struct MdPlan *plan, double t, double *re, double *im);

/**
 * # Safety
 * `plan` must come from [`md_plan_select`] or be null.
 */
void md_plan_free(struct MdPlan *plan);

/**
 * Runs a study from the text of a TOML config.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MdStatus md_study_run(const char *config, struct MdStudy **out);

/**
 * Number of rows of the per-`n` summary.
 *
 * # Safety
 * `study` must come from [`md_study_run`]; `out` must be valid.
 */
enum MdStatus md_study_summary_len(const struct MdStudy *study, size_t *out);

/**
 * # Safety
 * `study` must come from [`md_study_run`]; `out` must be valid.
 */
enum MdStatus md_study_summary_row(const struct MdStudy *study,
                                   size_t index,
                                   struct MdSummaryRow *out);

/**
 * Predicted and fitted exponents and the pass flag. `fitted` is NaN when
 * fewer than three sample sizes produced errors.
 *
 * # Safety
 * `study` must come from [`md_study_run`]; the outputs must be valid.
 */
enum MdStatus md_study_exponents(const struct MdStudy *study,
                                 double *predicted,
                                 double *fitted,
                                 bool *pass);

/**
 * # Safety
 * `study` must come from [`md_study_run`] or be null.
 */
void md_study_free(struct MdStudy *study);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MIXDECON_H */
