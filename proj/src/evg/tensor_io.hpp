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
#ifndef EVG_TENSOR_IO_HPP_
#define EVG_TENSOR_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evg {

struct Shape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  bool operator==(const Shape &) const = default;
  std::string to_string() const;
};

// A point of the data space [0,1]^D: row-major, channels-last pixels.
// Immutable; every constructor clamps into [0,1] and rejects NaN.
class ImageSample {
 public:
  ImageSample() = default;
  ImageSample(Shape shape, std::vector<float> data);

  static ImageSample filled(Shape shape, float value);

  const Shape &shape() const { return shape_; }
  std::span<const float> data() const { return data_; }
  std::size_t size() const { return data_.size(); }
  float at(int row, int col, int channel) const {
    return data_[(static_cast<std::size_t>(row) * shape_.width + col) * shape_.channels + channel];
  }

  bool operator==(const ImageSample &) const = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

enum class Split { kTrain, kValid, kTest };

std::string_view to_string(Split split);

// Non-empty, uniformly shaped sequence of samples.
class Dataset {
 public:
  Dataset(std::vector<ImageSample> samples, Split split);

  const Shape &shape() const { return samples_.front().shape(); }
  std::size_t size() const { return samples_.size(); }
  Split split() const { return split_; }
  const ImageSample &operator[](std::size_t i) const { return samples_[i]; }
  std::span<const ImageSample> samples() const { return samples_; }

  // First `n` samples (all of them if n >= size()).
  Dataset head(std::size_t n) const;

 private:
  std::vector<ImageSample> samples_;
  Split split_;
};

// Detector outputs aligned index-for-index with a batch. All entries finite.
class ScoreVector {
 public:
  ScoreVector() = default;
  explicit ScoreVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const ScoreVector &) const = default;

 private:
  std::vector<double> values_;
};

enum class DatasetFormat { kPngDir, kRawTensor };

DatasetFormat parse_dataset_format(std::string_view name);

struct LoadOptions {
  Split split = Split::kTest;
  // When set to 3, grayscale PNGs are replicated to three channels.
  std::optional<int> channels;
};

Dataset load_dataset(const std::filesystem::path &path, DatasetFormat format,
                     const LoadOptions &options = {});

// EVGT raw tensor: "EVGT", u32 ndim=4, dims (count,height,width,channels),
// float32 payload, all little-endian.
void save_raw_tensor(std::span<const ImageSample> samples, const std::filesystem::path &path);

ImageSample load_png(const std::filesystem::path &path, std::optional<int> channels = {});

// Tiles samples left-to-right, top-to-bottom into one 8-bit PNG; missing
// cells in the last row are black.
void save_sample_grid(std::span<const ImageSample> samples, int columns,
                      const std::filesystem::path &path);

// CSV with header "index,score".
void save_scores(const ScoreVector &scores, const std::filesystem::path &path);
ScoreVector load_scores(const std::filesystem::path &path);

}  // namespace evg

#endif  // EVG_TENSOR_IO_HPP_
