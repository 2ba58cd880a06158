#ifndef ADVDYN_H
#define ADVDYN_H

/* This header is generated by cbindgen from the advdyn-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>


typedef enum {
  ADVDYN_MODEL_SUPPORTER = 0,
  ADVDYN_MODEL_CONTRIBUTOR = 1,
  ADVDYN_MODEL_REDUCED_SUPPORTER = 2,
  ADVDYN_MODEL_REDUCED_CONTRIBUTOR = 3,
} AdvdynModel;

/**
 * Final outcome classification of a trajectory.
 */
typedef enum {
  ADVDYN_OUTCOME_BLUE_VICTORY = 0,
  ADVDYN_OUTCOME_RED_VICTORY = 1,
  ADVDYN_OUTCOME_DRAW = 2,
  /**
   * The trajectory diverged or failed; no outcome is defined.
   */
  ADVDYN_OUTCOME_UNDEFINED = 3,
} AdvdynOutcome;

typedef enum {
  ADVDYN_STATUS_OK = 0,
  ADVDYN_STATUS_NULL_POINTER = 1,
  ADVDYN_STATUS_INVALID_ARGUMENT = 2,
  ADVDYN_STATUS_NUMERIC_FAILURE = 3,
  ADVDYN_STATUS_IO_ERROR = 4,
} AdvdynStatus;

typedef enum {
  ADVDYN_TERMINATION_REACHED_END = 0,
  ADVDYN_TERMINATION_EXTINCTION_BLUE = 1,
  ADVDYN_TERMINATION_EXTINCTION_RED = 2,
  ADVDYN_TERMINATION_DIVERGED = 3,
  ADVDYN_TERMINATION_STEP_FAILURE = 4,
} AdvdynTermination;

/**
 * Opaque dense-sampled trajectory handle.
 */
typedef struct AdvdynTrajectory AdvdynTrajectory;

/**
 * Model coefficients; the step parameters shape the smooth extinction
 * cutoff.
 */
typedef struct {
  double lethality_red;
  double lethality_blue;
  double transfer_blue;
  double transfer_red;
  double capacity_red;
  double capacity_blue;
  double standing_population;
  double step_steepness;
  double step_extinction_offset_scale;
} AdvdynParams;

typedef struct {
  double rel_tol;
  double abs_tol;
  double t_end;
  double max_step;
  double sample_interval;
  bool stop_on_extinction;
  /**
   * Threshold used when `stop_on_extinction` is set.
   */
  double extinction_threshold;
} AdvdynIntegratorOptions;

/**
 * The five populations at one instant.
 */
typedef struct {
  double blue;
  double red;
  double red_supporters;
  double blue_supporters;
  double neutral;
} AdvdynState;

/**
 * Closed-form predictor bundle. Values whose derivation assumptions fail
 * at the inputs carry `false` in the matching `_valid` flag.
 */
typedef struct {
  double rho;
  double threshold_exact;
  double threshold_approx;
  bool threshold_approx_valid;
  double stalemate_timescale;
  bool oscillatory;
  double period;
  bool period_valid;
  double count;
  bool count_valid;
} AdvdynPrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default model parameters: unit rates, unit capacities, and the steep
 * smooth step.
 */
AdvdynParams advdyn_params_default(void);

/**
 * Default integration settings: tolerances 1e-6/1e-8, horizon 50,
 * samples every 0.01.
 */
AdvdynIntegratorOptions advdyn_integrator_defaults(void);

/**
 * Integrate one trajectory. On success `*out` owns a handle that must be
 * released with [`advdyn_trajectory_free`]. Runs that end in divergence or
 * step failure return `ADVDYN_STATUS_NUMERIC_FAILURE` but still hand out
 * the partial trajectory.
 *
 * # Safety
 * `params`, `initial`, `options` and `out` must be valid pointers; `out`
 * must point to writable storage for one pointer.
 */
AdvdynStatus advdyn_simulate(AdvdynModel model,
                             const AdvdynParams *params,
                             const AdvdynState *initial,
                             const AdvdynIntegratorOptions *options,
                             AdvdynTrajectory **out);

/**
 * Number of dense samples in the trajectory (zero for a null handle).
 *
 * # Safety
 * `traj` must be null or a live handle from [`advdyn_simulate`].
 */
uintptr_t advdyn_trajectory_len(const AdvdynTrajectory *traj);

/**
 * Fetch sample `index` into `time_out` and `state_out`.
 *
 * # Safety
 * `traj` must be a live handle; the out pointers must be valid.
 */
AdvdynStatus advdyn_trajectory_sample(const AdvdynTrajectory *traj,
                                      uintptr_t index,
                                      double *time_out,
                                      AdvdynState *state_out);

/**
 * Why the run ended.
 *
 * # Safety
 * `traj` must be null or a live handle; null reports a step failure.
 */
AdvdynTermination advdyn_trajectory_termination(const AdvdynTrajectory *traj);

/**
 * Classify the final state: victory margins within `draw_threshold` count
 * as a draw. Failed runs report `ADVDYN_OUTCOME_UNDEFINED`.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
AdvdynOutcome advdyn_trajectory_outcome(const AdvdynTrajectory *traj, double draw_threshold);

/**
 * Write the trajectory as CSV (`t,B,R,g,gamma,Gamma,G_total`) to `path`.
 *
 * # Safety
 * `traj` must be a live handle and `path` a NUL-terminated UTF-8 string.
 */
AdvdynStatus advdyn_trajectory_write_csv(const AdvdynTrajectory *traj, const char *path);

/**
 * Release a trajectory handle. Null is a no-op.
 *
 * # Safety
 * `traj` must be null or a handle from [`advdyn_simulate`] that has not
 * been freed already.
 */
void advdyn_trajectory_free(AdvdynTrajectory *traj);

/**
 * Evaluate every closed-form predictor at the given parameters and initial
 * state. Requires the supporter-analytics domain
 * `total green > 2 * red_supporters > 0`.
 *
 * # Safety
 * All pointers must be valid.
 */
AdvdynStatus advdyn_predict(const AdvdynParams *params,
                            const AdvdynState *initial,
                            AdvdynPrediction *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *advdyn_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADVDYN_H */
