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
#include "evg/benchmark.hpp"

#include <cmath>
#include <random>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>

#include "evg/error.hpp"
#include "evg/report.hpp"
#include "evg/rng.hpp"

namespace evg {

ImageSample render_blob(const Shape &shape, double center_x, double center_y, double sigma, double amplitude,
                        const float *tint) {
  std::vector<float> data(shape.size());
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int r = 0; r < shape.height; ++r) {
    for (int c = 0; c < shape.width; ++c) {
      const double dx = c - center_x, dy = r - center_y;
      const double v = amplitude * std::exp(-(dx * dx + dy * dy) * inv);
      for (int ch = 0; ch < shape.channels; ++ch) {
        const double t = tint ? tint[ch] : 1.0;
        data[(static_cast<std::size_t>(r) * shape.width + c) * shape.channels + ch] = static_cast<float>(v * t);
      }
    }
  }
  return ImageSample(shape, std::move(data));
}

namespace {

std::vector<ImageSample> draw_blobs(const BlobBenchmarkConfig &cfg, std::size_t n, double offset, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> jitter(-cfg.jitter, cfg.jitter);
  std::uniform_real_distribution<double> sigma(cfg.sigma_lo, cfg.sigma_hi);
  std::uniform_real_distribution<double> amp(cfg.amplitude_lo, cfg.amplitude_hi);
  std::uniform_real_distribution<double> tint(cfg.tint_lo, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  const double cx = (cfg.shape.width - 1) / 2.0 - offset;
  const double cy = (cfg.shape.height - 1) / 2.0 - offset;

  std::vector<ImageSample> out;
  out.reserve(n);
  std::vector<float> t(static_cast<std::size_t>(cfg.shape.channels));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = cx + jitter(rng), y = cy + jitter(rng);
    const double s = sigma(rng), a = amp(rng);
    for (auto &v : t) v = static_cast<float>(tint(rng));
    const ImageSample clean = render_blob(cfg.shape, x, y, s, a, t.data());
    std::vector<float> px(clean.data().begin(), clean.data().end());
    if (cfg.noise_std > 0.0) {
      for (auto &v : px) v += static_cast<float>(noise(rng));
    }
    out.emplace_back(cfg.shape, std::move(px));
  }
  return out;
}

}  // namespace

BlobBenchmark make_blob_benchmark(const BlobBenchmarkConfig &cfg) {
  if (cfg.n_train == 0 || cfg.n_valid == 0 || cfg.n_test == 0 || cfg.n_out == 0) {
    throw InvalidArgument("blob benchmark splits must be non-empty");
  }
  if (cfg.sigma_lo <= 0.0 || cfg.sigma_hi < cfg.sigma_lo) throw InvalidArgument("invalid blob sigma range");
  return BlobBenchmark{
      Dataset(draw_blobs(cfg, cfg.n_train, 0.0, derive_seed(cfg.seed, 0)), Split::kTrain),
      Dataset(draw_blobs(cfg, cfg.n_valid, 0.0, derive_seed(cfg.seed, 1)), Split::kValid),
      Dataset(draw_blobs(cfg, cfg.n_test, 0.0, derive_seed(cfg.seed, 2)), Split::kTest),
      Dataset(draw_blobs(cfg, cfg.n_out, cfg.corner_offset, derive_seed(cfg.seed, 3)), Split::kTest),
  };
}

void write_blob_benchmark(const BlobBenchmarkConfig &cfg, const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  const auto b = make_blob_benchmark(cfg);
  save_raw_tensor(b.train.samples(), dir / "train.evgt");
  save_raw_tensor(b.valid.samples(), dir / "valid.evgt");
  save_raw_tensor(b.test.samples(), dir / "test.evgt");
  save_raw_tensor(b.out.samples(), dir / "out.evgt");

  nlohmann::json run = {
      {"schema_version", 1},
      {"in_dataset", {{"format", "raw_tensor"}, {"train", "train.evgt"}, {"valid", "valid.evgt"}, {"test", "test.evgt"}}},
      {"out_dataset", {{"format", "raw_tensor"}, {"path", "out.evgt"}}},
      {"detector", {{"type", "mahalanobis"}}},
      {"variation", {{"type", "affine"}, {"max_instances", 50}, {"temperature", 1.0}}},
      {"sampler", {{"n_chains", 20}, {"n_steps", 500}, {"proposal_std", 0.1}}},
      {"seed", cfg.seed},
      {"n_repeats", 1},
      {"output_dir", "runs"},
  };
  write_text_file(dir / "evaluate.json", dump_stable(run));
}

}  // namespace evg
