/**
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
#include "evg.h"

#include <cstring>
#include <new>
#include <string>

#include <fmt/format.h>

#include "evg/benchmark.hpp"
#include "evg/detectors.hpp"
#include "evg/error.hpp"
#include "evg/harness.hpp"
#include "evg/landscape.hpp"
#include "evg/linf_attack.hpp"
#include "evg/metrics.hpp"
#include "evg/sampler.hpp"
#include "evg/selftest.hpp"
#include "evg/tensor_io.hpp"
#include "evg/variation.hpp"

struct evg_dataset {
  evg::Dataset dataset;
};

struct evg_detector {
  evg::Detector detector;
};

struct evg_search_result {
  std::vector<evg::InstanceResult> results;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
evg_status guard(Fn &&fn) {
  try {
    fn();
    g_last_error.clear();
    return EVG_OK;
  } catch (const evg::Error &e) {
    g_last_error = e.what();
    return static_cast<evg_status>(e.code());
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return EVG_ERR_INTERNAL;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return EVG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return EVG_ERR_INTERNAL;
  }
}

template <class T>
T &deref(T *p, const char *what) {
  if (!p) throw evg::InvalidArgument(fmt::format("{} is null", what));
  return *p;
}

void need(const void *p, const char *what) {
  if (!p) throw evg::InvalidArgument(fmt::format("{} is null", what));
}

evg::Shape make_shape(int h, int w, int c) {
  if (h <= 0 || w <= 0 || (c != 1 && c != 3)) {
    throw evg::InvalidArgument(fmt::format("invalid shape {}x{}x{}", h, w, c));
  }
  return {h, w, c};
}

evg::ImageSample make_sample(const float *data, const evg::Shape &shape) {
  need(data, "image");
  return evg::ImageSample(shape, std::vector<float>(data, data + shape.size()));
}

void copy_out(const evg::ImageSample &s, float *out) {
  need(out, "output buffer");
  std::copy(s.data().begin(), s.data().end(), out);
}

void copy_path(const std::string &path, char *buf, std::size_t len) {
  if (!buf || len == 0) return;
  const std::size_t n = std::min(path.size(), len - 1);
  std::memcpy(buf, path.data(), n);
  buf[n] = '\0';
}

evg::RunOptions run_options(const evg_run_options *o) {
  evg::RunOptions r;
  if (o) {
    r.threads = o->threads;
    r.fixed_clock = o->fixed_clock != 0;
  }
  return r;
}

}  // namespace

extern "C" {

const char *evg_version(void) { return "1.0.0"; }

const char *evg_last_error(void) { return g_last_error.c_str(); }

const char *evg_status_name(evg_status status) {
  switch (status) {
    case EVG_OK: return "ok";
    case EVG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EVG_ERR_IO: return "io error";
    case EVG_ERR_FORMAT: return "format error";
    case EVG_ERR_DOMAIN: return "domain error";
    case EVG_ERR_PROTOCOL: return "protocol error";
    case EVG_ERR_NUMERIC: return "numeric error";
    case EVG_ERR_CONFIG: return "config error";
    case EVG_ERR_RUNTIME: return "runtime error";
    case EVG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int evg_exit_code(evg_status status) {
  if (status == EVG_OK) return 0;
  if (status == EVG_ERR_INTERNAL) return 1;
  return evg::exit_code_for(static_cast<evg::ErrorCode>(status));
}

// ---- datasets

evg_status evg_dataset_load(const char *path, const char *format, int channels, evg_dataset **out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    evg::LoadOptions o;
    if (channels != 0) o.channels = channels;
    auto ds = evg::load_dataset(path, evg::parse_dataset_format(format ? format : "raw_tensor"), o);
    *out = new evg_dataset{std::move(ds)};
  });
}

evg_status evg_dataset_from_buffer(const float *data, size_t count, int height, int width, int channels,
                                   evg_dataset **out) {
  return guard([&] {
    need(data, "data");
    need(out, "out");
    const auto shape = make_shape(height, width, channels);
    std::vector<evg::ImageSample> samples;
    samples.reserve(count);
    for (size_t i = 0; i < count; ++i) samples.push_back(make_sample(data + i * shape.size(), shape));
    *out = new evg_dataset{evg::Dataset(std::move(samples), evg::Split::kTest)};
  });
}

size_t evg_dataset_size(const evg_dataset *dataset) { return dataset ? dataset->dataset.size() : 0; }

evg_status evg_dataset_shape(const evg_dataset *dataset, int *height, int *width, int *channels) {
  return guard([&] {
    const auto &s = deref(dataset, "dataset").dataset.shape();
    if (height) *height = s.height;
    if (width) *width = s.width;
    if (channels) *channels = s.channels;
  });
}

evg_status evg_dataset_copy_sample(const evg_dataset *dataset, size_t index, float *out, size_t len) {
  return guard([&] {
    const auto &ds = deref(dataset, "dataset").dataset;
    if (index >= ds.size()) throw evg::InvalidArgument(fmt::format("index {} out of range", index));
    if (len < ds[index].size()) throw evg::InvalidArgument("output buffer too small");
    copy_out(ds[index], out);
  });
}

evg_status evg_dataset_save_raw(const evg_dataset *dataset, const char *path) {
  return guard([&] {
    need(path, "path");
    evg::save_raw_tensor(deref(dataset, "dataset").dataset.samples(), path);
  });
}

evg_status evg_dataset_save_grid(const evg_dataset *dataset, int columns, const char *path) {
  return guard([&] {
    need(path, "path");
    if (columns < 1) throw evg::InvalidArgument("columns must be >= 1");
    evg::save_sample_grid(deref(dataset, "dataset").dataset.samples(), columns, path);
  });
}

void evg_dataset_free(evg_dataset *dataset) { delete dataset; }

// ---- detectors

evg_status evg_detector_fit(const char *kind, const evg_dataset *train, double param, evg_detector **out) {
  return guard([&] {
    need(kind, "kind");
    need(out, "out");
    const auto &ds = deref(train, "train").dataset;
    const std::string k = kind;
    if (k == "mahalanobis") {
      *out = new evg_detector{evg::fit_mahalanobis(ds)};
    } else if (k == "knn") {
      *out = new evg_detector{evg::fit_knn(ds, static_cast<int>(param))};
    } else if (k == "kernel_energy") {
      *out = new evg_detector{evg::fit_kernel_energy(ds, param)};
    } else {
      throw evg::InvalidArgument(fmt::format("unknown detector kind '{}'", k));
    }
  });
}

evg_status evg_detector_linear(const double *w, size_t n, int height, int width, int channels, evg_detector **out) {
  return guard([&] {
    need(w, "weights");
    need(out, "out");
    const auto shape = make_shape(height, width, channels);
    if (n != shape.size()) throw evg::InvalidArgument(fmt::format("{} weights for {} pixels", n, shape.size()));
    *out = new evg_detector{evg::make_synthetic_landscape(evg::linear_landscape(std::vector<double>(w, w + n)))};
  });
}

evg_status evg_detector_calibrate(const evg_detector *detector, const evg_dataset *valid, evg_detector **out) {
  return guard([&] {
    need(out, "out");
    *out = new evg_detector{evg::calibrate(deref(detector, "detector").detector, deref(valid, "valid").dataset)};
  });
}

evg_status evg_detector_calibration(const evg_detector *detector, int *calibrated, double *mean, double *std) {
  return guard([&] {
    const auto &c = deref(detector, "detector").detector.calibration();
    if (calibrated) *calibrated = c.has_value();
    if (mean) *mean = c ? c->mean : 0.0;
    if (std) *std = c ? c->std : 1.0;
  });
}

evg_status evg_detector_score(const evg_detector *detector, const evg_dataset *samples, double *out, size_t len) {
  return guard([&] {
    need(out, "out");
    const auto &ds = deref(samples, "samples").dataset;
    if (len < ds.size()) throw evg::InvalidArgument("output buffer too small");
    const auto s = deref(detector, "detector").detector.score_batch(ds.samples());
    std::copy(s.values().begin(), s.values().end(), out);
  });
}

void evg_detector_free(evg_detector *detector) { delete detector; }

// ---- metrics

evg_status evg_auc(const double *in_scores, size_t n_in, const double *out_scores, size_t n_out, double *result) {
  return guard([&] {
    need(result, "result");
    if ((n_in && !in_scores) || (n_out && !out_scores)) throw evg::InvalidArgument("score array is null");
    *result = evg::auc(evg::ScoreVector(std::vector<double>(in_scores, in_scores + n_in)),
                       evg::ScoreVector(std::vector<double>(out_scores, out_scores + n_out)));
  });
}

evg_status evg_minrank(const double *in_scores, size_t n_in, const double *adversarial, size_t n_adv,
                       size_t *result) {
  return guard([&] {
    need(result, "result");
    if ((n_in && !in_scores) || (n_adv && !adversarial)) throw evg::InvalidArgument("score array is null");
    *result = evg::minrank(evg::ScoreVector(std::vector<double>(in_scores, in_scores + n_in)),
                           evg::ScoreVector(std::vector<double>(adversarial, adversarial + n_adv)));
  });
}

evg_status evg_mh_acceptance(double f_current, double f_proposed, double temperature, double *result) {
  return guard([&] {
    need(result, "result");
    *result = evg::mh_acceptance_probability(f_current, f_proposed, temperature);
  });
}

// ---- variation models

evg_status evg_apply_affine(const float *image, int height, int width, int channels, const double params[5],
                            float *out) {
  return guard([&] {
    need(params, "params");
    const auto base = make_sample(image, make_shape(height, width, channels));
    copy_out(evg::apply_affine(base, {params[0], params[1], params[2], params[3], params[4]}), out);
  });
}

evg_status evg_apply_color(const float *image, int height, int width, int channels, const double params[4],
                           float *out) {
  return guard([&] {
    need(params, "params");
    const auto base = make_sample(image, make_shape(height, width, channels));
    copy_out(evg::apply_color(base, {params[0], params[1], params[2], params[3]}), out);
  });
}

// ---- search

void evg_sampler_config_default(evg_sampler_config *config) {
  if (!config) return;
  const evg::SamplerConfig d;
  *config = {d.n_chains, d.n_steps, d.proposal_std, d.seed, 1.0};
}

evg_status evg_instance_search(const evg_detector *detector, const evg_dataset *bases, const char *model,
                               const evg_sampler_config *config, size_t max_instances, evg_search_result **out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    const auto &cfg = deref(config, "config");
    const std::string m = model;
    evg::InstanceModel kind;
    if (m == "affine") {
      kind = evg::InstanceModel::kAffine;
    } else if (m == "color") {
      kind = evg::InstanceModel::kColor;
    } else {
      throw evg::InvalidArgument(fmt::format("unknown instance model '{}'", m));
    }
    evg::SamplerConfig sc;
    sc.n_chains = cfg.n_chains;
    sc.n_steps = cfg.n_steps;
    sc.proposal_std = cfg.proposal_std;
    sc.seed = cfg.seed;
    const auto &ds = deref(bases, "bases").dataset;
    auto results = evg::run_instance_conditional_suite(deref(detector, "detector").detector, ds, kind, sc,
                                                       max_instances == 0 ? ds.size() : max_instances,
                                                       cfg.temperature);
    *out = new evg_search_result{std::move(results)};
  });
}

size_t evg_search_result_count(const evg_search_result *result) { return result ? result->results.size() : 0; }

evg_status evg_search_result_scores(const evg_search_result *result, double *clean, double *worst, size_t len) {
  return guard([&] {
    const auto &r = deref(result, "result").results;
    if (len < r.size()) throw evg::InvalidArgument("output buffer too small");
    for (size_t i = 0; i < r.size(); ++i) {
      if (clean) clean[i] = r[i].clean_score;
      if (worst) worst[i] = r[i].worst_score;
    }
  });
}

evg_status evg_search_result_worst_cases(const evg_search_result *result, evg_dataset **out) {
  return guard([&] {
    need(out, "out");
    std::vector<evg::ImageSample> samples;
    for (const auto &r : deref(result, "result").results) samples.push_back(r.worst_sample);
    *out = new evg_dataset{evg::Dataset(std::move(samples), evg::Split::kTest)};
  });
}

void evg_search_result_free(evg_search_result *result) { delete result; }

// ---- l-infinity attack

void evg_attack_config_default(evg_attack_config *config) {
  if (!config) return;
  const evg::AttackConfig d;
  *config = {d.epsilon, d.n_steps, d.momentum, d.step_size, d.halving_period, d.fd_delta, d.seed};
}

evg_status evg_linf_attack(const evg_detector *detector, const float *base, size_t len,
                           const evg_attack_config *config, float *x_adv, double *f_adv, double *f_base) {
  return guard([&] {
    const auto &det = deref(detector, "detector").detector;
    const auto &cfg = deref(config, "config");
    const auto shape = det.input_shape();
    if (shape && shape->size() != len) {
      throw evg::InvalidArgument(fmt::format("image has {} values, detector expects {}", len, shape->size()));
    }
    const evg::Shape s = shape ? *shape : evg::Shape{1, static_cast<int>(len), 1};
    const auto x = make_sample(base, s);
    evg::AttackConfig ac;
    ac.epsilon = cfg.epsilon;
    ac.n_steps = cfg.n_steps;
    ac.momentum = cfg.momentum;
    ac.step_size = cfg.step_size;
    ac.halving_period = cfg.halving_period;
    ac.fd_delta = cfg.fd_delta;
    ac.seed = cfg.seed;
    const auto r = evg::linf_attack(det, x, ac);
    if (x_adv) copy_out(r.x_adv, x_adv);
    if (f_adv) *f_adv = r.f_adv;
    if (f_base) *f_base = r.f_base;
  });
}

// ---- commands

evg_status evg_cmd_evaluate(const char *config_path, const evg_run_options *options, char *run_dir,
                            size_t run_dir_len) {
  return guard([&] {
    need(config_path, "config_path");
    const auto config = evg::load_run_config(config_path, evg::ConfigMode::kEvaluate);
    const auto outcome = evg::run_evaluate(config, run_options(options));
    copy_path(outcome.run_dir.string(), run_dir, run_dir_len);
  });
}

evg_status evg_cmd_transfer(const char *config_path, const evg_run_options *options, char *run_dir,
                            size_t run_dir_len) {
  return guard([&] {
    need(config_path, "config_path");
    const auto config = evg::load_run_config(config_path, evg::ConfigMode::kTransfer);
    const auto outcome = evg::run_transfer(config, run_options(options));
    copy_path(outcome.run_dir.string(), run_dir, run_dir_len);
  });
}

size_t evg_selftest_suite_count(void) { return evg::selftest_suites().size(); }

const char *evg_selftest_suite_name(size_t index) {
  const auto &names = evg::selftest_suites();
  return index < names.size() ? names[index].c_str() : nullptr;
}

evg_status evg_selftest(int force_fail, evg_selftest_callback callback, void *user, int *all_passed) {
  return guard([&] {
    bool ok = true;
    evg::run_selftest(force_fail != 0, [&](const evg::SuiteResult &r) {
      ok = ok && r.passed;
      if (callback) callback(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), user);
    });
    if (all_passed) *all_passed = ok ? 1 : 0;
  });
}

evg_status evg_make_blobs(const char *directory, uint64_t seed, size_t n_train, size_t n_valid, size_t n_test,
                          size_t n_out) {
  return guard([&] {
    need(directory, "directory");
    evg::BlobBenchmarkConfig c;
    c.seed = seed;
    if (n_train) c.n_train = n_train;
    if (n_valid) c.n_valid = n_valid;
    if (n_test) c.n_test = n_test;
    if (n_out) c.n_out = n_out;
    evg::write_blob_benchmark(c, directory);
  });
}

}  // extern "C"
