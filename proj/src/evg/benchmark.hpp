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
#ifndef EVG_BENCHMARK_HPP_
#define EVG_BENCHMARK_HPP_

#include <cstdint>
#include <filesystem>

#include "evg/tensor_io.hpp"

namespace evg {

// Miniature benchmark: inliers are Gaussian blobs near the image center,
// outliers the same blobs near the top-left corner. Per sample the center
// is jittered, and sigma, amplitude and per-channel tint are drawn
// uniformly; pixel noise is added before clamping. The background is zero.
struct BlobBenchmarkConfig {
  Shape shape{8, 8, 3};
  std::size_t n_train = 500;
  std::size_t n_valid = 200;
  std::size_t n_test = 500;
  std::size_t n_out = 100;
  double sigma_lo = 0.9;
  double sigma_hi = 1.1;
  double amplitude_lo = 0.7;
  double amplitude_hi = 0.9;
  double tint_lo = 0.8;
  double jitter = 0.25;      // pixels, uniform in [-jitter, jitter] per axis
  double noise_std = 0.03;
  double corner_offset = 2.0;  // outlier center = image center - offset, per axis
  std::uint64_t seed = 0;
};

struct BlobBenchmark {
  Dataset train;
  Dataset valid;
  Dataset test;
  Dataset out;
};

BlobBenchmark make_blob_benchmark(const BlobBenchmarkConfig &config);

// One blob rendered with explicit parameters and no noise.
ImageSample render_blob(const Shape &shape, double center_x, double center_y, double sigma,
                        double amplitude, const float *tint = nullptr);

// Writes train/valid/test/out as .evgt files plus a run config template
// (evaluate.json) for the affine search.
void write_blob_benchmark(const BlobBenchmarkConfig &config, const std::filesystem::path &directory);

}  // namespace evg

#endif  // EVG_BENCHMARK_HPP_
