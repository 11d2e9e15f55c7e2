/*
 * Copyright 2026 The EvG Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef EVG_H_
#define EVG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(EVG_BUILDING_LIBRARY)
#define EVG_API __attribute__((visibility("default")))
#else
#define EVG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returning evg_status leaves a message for
 * evg_last_error() on failure. Messages are per thread. */
typedef enum evg_status {
  EVG_OK = 0,
  EVG_ERR_INVALID_ARGUMENT = 1,
  EVG_ERR_IO = 2,
  EVG_ERR_FORMAT = 3,
  EVG_ERR_DOMAIN = 4,
  EVG_ERR_PROTOCOL = 5,
  EVG_ERR_NUMERIC = 6,
  EVG_ERR_CONFIG = 7,
  EVG_ERR_RUNTIME = 8,
  EVG_ERR_INTERNAL = 9
} evg_status;

EVG_API const char *evg_version(void);
EVG_API const char *evg_last_error(void);
EVG_API const char *evg_status_name(evg_status status);
/* Process exit code for a failed command: 2 for configuration errors,
 * 1 otherwise, 0 for EVG_OK. */
EVG_API int evg_exit_code(evg_status status);

/* ---- Datasets: uniformly shaped images, channels-last, values in [0,1] */

typedef struct evg_dataset evg_dataset;

/* format: "raw_tensor" or "png_dir". channels: 0 keeps the stored
 * channel count, 3 replicates grayscale PNGs. */
EVG_API evg_status evg_dataset_load(const char *path, const char *format, int channels, evg_dataset **out);
/* count images of height x width x channels floats, copied and clamped. */
EVG_API evg_status evg_dataset_from_buffer(const float *data, size_t count, int height, int width, int channels,
                                           evg_dataset **out);
EVG_API size_t evg_dataset_size(const evg_dataset *dataset);
EVG_API evg_status evg_dataset_shape(const evg_dataset *dataset, int *height, int *width, int *channels);
EVG_API evg_status evg_dataset_copy_sample(const evg_dataset *dataset, size_t index, float *out, size_t len);
EVG_API evg_status evg_dataset_save_raw(const evg_dataset *dataset, const char *path);
EVG_API evg_status evg_dataset_save_grid(const evg_dataset *dataset, int columns, const char *path);
EVG_API void evg_dataset_free(evg_dataset *dataset);

/* ---- Detectors: larger score means more outlier-like */

typedef struct evg_detector evg_detector;

/* kind: "mahalanobis", "knn" (param = k) or "kernel_energy"
 * (param = bandwidth, <= 0 for the median heuristic). */
EVG_API evg_status evg_detector_fit(const char *kind, const evg_dataset *train, double param, evg_detector **out);
/* f(x) = w . x over flattened pixels; n must equal height*width*channels. */
EVG_API evg_status evg_detector_linear(const double *w, size_t n, int height, int width, int channels,
                                       evg_detector **out);
/* New handle standardized by mean and std of raw scores on valid. */
EVG_API evg_status evg_detector_calibrate(const evg_detector *detector, const evg_dataset *valid, evg_detector **out);
EVG_API evg_status evg_detector_calibration(const evg_detector *detector, int *calibrated, double *mean, double *std);
/* Standardized scores when calibrated, raw otherwise. len >= size. */
EVG_API evg_status evg_detector_score(const evg_detector *detector, const evg_dataset *samples, double *out,
                                      size_t len);
EVG_API void evg_detector_free(evg_detector *detector);

/* ---- Metrics */

EVG_API evg_status evg_auc(const double *in_scores, size_t n_in, const double *out_scores, size_t n_out,
                           double *result);
EVG_API evg_status evg_minrank(const double *in_scores, size_t n_in, const double *adversarial, size_t n_adv,
                               size_t *result);
EVG_API evg_status evg_mh_acceptance(double f_current, double f_proposed, double temperature, double *result);

/* ---- Variation models on a single image (len = height*width*channels) */

/* params: angle_deg, translate_x, translate_y, scale, shear_deg */
EVG_API evg_status evg_apply_affine(const float *image, int height, int width, int channels, const double params[5],
                                    float *out);
/* params: brightness, contrast, saturation, hue */
EVG_API evg_status evg_apply_color(const float *image, int height, int width, int channels, const double params[4],
                                   float *out);

/* ---- Instance-conditional adversarial search */

typedef struct evg_sampler_config {
  int n_chains;
  int n_steps;
  double proposal_std;
  uint64_t seed;
  double temperature;
} evg_sampler_config;

EVG_API void evg_sampler_config_default(evg_sampler_config *config);

typedef struct evg_search_result evg_search_result;

/* model: "affine" or "color". max_instances 0 searches every base. The
 * detector must be calibrated. */
EVG_API evg_status evg_instance_search(const evg_detector *detector, const evg_dataset *bases, const char *model,
                                       const evg_sampler_config *config, size_t max_instances,
                                       evg_search_result **out);
EVG_API size_t evg_search_result_count(const evg_search_result *result);
EVG_API evg_status evg_search_result_scores(const evg_search_result *result, double *clean, double *worst,
                                            size_t len);
EVG_API evg_status evg_search_result_worst_cases(const evg_search_result *result, evg_dataset **out);
EVG_API void evg_search_result_free(evg_search_result *result);

/* ---- l-infinity attack */

typedef struct evg_attack_config {
  double epsilon;
  int n_steps;
  double momentum;
  double step_size;
  int halving_period;
  double fd_delta;
  uint64_t seed;
} evg_attack_config;

EVG_API void evg_attack_config_default(evg_attack_config *config);
/* The detector must be calibrated; f_adv and f_base are standardized. */
EVG_API evg_status evg_linf_attack(const evg_detector *detector, const float *base, size_t len,
                                   const evg_attack_config *config, float *x_adv, double *f_adv, double *f_base);

/* ---- Commands */

typedef struct evg_run_options {
  size_t threads;  /* 0: all cores */
  int fixed_clock; /* nonzero: run directory "fixed", zero timings */
} evg_run_options;

/* run_dir (optional) receives the NUL-terminated run directory. */
EVG_API evg_status evg_cmd_evaluate(const char *config_path, const evg_run_options *options, char *run_dir,
                                    size_t run_dir_len);
EVG_API evg_status evg_cmd_transfer(const char *config_path, const evg_run_options *options, char *run_dir,
                                    size_t run_dir_len);

typedef void (*evg_selftest_callback)(const char *suite, int passed, const char *detail, void *user);
EVG_API size_t evg_selftest_suite_count(void);
EVG_API const char *evg_selftest_suite_name(size_t index);
/* all_passed is set to 1 when every suite passed. */
EVG_API evg_status evg_selftest(int force_fail, evg_selftest_callback callback, void *user, int *all_passed);

/* Writes the miniature blob benchmark (.evgt splits and evaluate.json). */
EVG_API evg_status evg_make_blobs(const char *directory, uint64_t seed, size_t n_train, size_t n_valid,
                                  size_t n_test, size_t n_out);

#ifdef __cplusplus
}
#endif

#endif /* EVG_H_ */
