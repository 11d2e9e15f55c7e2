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
#include "evg/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <png.h>

#include "evg/error.hpp"

namespace evg {

namespace fs = std::filesystem;

std::string Shape::to_string() const { return fmt::format("{}x{}x{}", height, width, channels); }

ImageSample::ImageSample(Shape shape, std::vector<float> data)
    : shape_(shape), data_(std::move(data)) {
  if (shape_.height <= 0 || shape_.width <= 0 || shape_.channels <= 0) {
    throw InvalidArgument(fmt::format("invalid sample shape {}", shape_.to_string()));
  }
  if (data_.size() != shape_.size()) {
    throw InvalidArgument(fmt::format("sample data has {} values, shape {} needs {}",
                                      data_.size(), shape_.to_string(), shape_.size()));
  }
  for (float &v : data_) {
    if (std::isnan(v)) throw NumericError("NaN pixel value");
    v = std::clamp(v, 0.0f, 1.0f);
  }
}

ImageSample ImageSample::filled(Shape shape, float value) {
  return ImageSample(shape, std::vector<float>(shape.size(), value));
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "test";
}

Dataset::Dataset(std::vector<ImageSample> samples, Split split)
    : samples_(std::move(samples)), split_(split) {
  if (samples_.empty()) throw InvalidArgument("dataset is empty");
  const Shape &s = samples_.front().shape();
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (samples_[i].shape() != s) {
      throw FormatError(fmt::format("shape mismatch: sample {} is {}, expected {}", i,
                                    samples_[i].shape().to_string(), s.to_string()));
    }
  }
}

Dataset Dataset::head(std::size_t n) const {
  n = std::min(n, samples_.size());
  return Dataset(std::vector<ImageSample>(samples_.begin(), samples_.begin() + n), split_);
}

ScoreVector::ScoreVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NumericError(fmt::format("non-finite score at index {}", i));
    }
  }
}

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "png_dir") return DatasetFormat::kPngDir;
  if (name == "raw_tensor") return DatasetFormat::kRawTensor;
  throw InvalidArgument(fmt::format("unknown dataset format '{}'", name));
}

namespace {

constexpr char kRawMagic[4] = {'E', 'V', 'G', 'T'};

std::uint32_t read_u32_le(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load_raw_tensor(const fs::path &path, Split split) {
  const std::string bytes = read_file(path);
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  if (bytes.size() < 8 || std::memcmp(p, kRawMagic, 4) != 0) {
    throw FormatError(fmt::format("'{}': magic mismatch (expected EVGT)", path.string()));
  }
  const std::uint32_t ndim = read_u32_le(p + 4);
  if (ndim != 4) {
    throw FormatError(fmt::format("'{}': expected 4 dims (count,height,width,channels), got {}",
                                  path.string(), ndim));
  }
  if (bytes.size() < 8 + 16) throw FormatError(fmt::format("'{}': truncated header", path.string()));
  std::uint32_t dims[4];
  for (int i = 0; i < 4; ++i) dims[i] = read_u32_le(p + 8 + 4 * i);
  const Shape shape{static_cast<int>(dims[1]), static_cast<int>(dims[2]), static_cast<int>(dims[3])};
  if (dims[0] == 0 || shape.height <= 0 || shape.width <= 0 || shape.channels <= 0) {
    throw FormatError(fmt::format("'{}': invalid dims", path.string()));
  }
  const std::size_t per_sample = shape.size();
  const std::uint64_t needed = static_cast<std::uint64_t>(dims[0]) * per_sample * 4;
  const std::size_t payload = bytes.size() - 24;
  if (payload < needed) {
    throw FormatError(fmt::format("'{}': truncated payload ({} bytes, header implies {})",
                                  path.string(), payload, needed));
  }
  std::vector<ImageSample> samples;
  samples.reserve(dims[0]);
  const unsigned char *q = p + 24;
  for (std::uint32_t n = 0; n < dims[0]; ++n) {
    std::vector<float> data(per_sample);
    for (std::size_t i = 0; i < per_sample; ++i, q += 4) {
      data[i] = std::bit_cast<float>(read_u32_le(q));
    }
    samples.emplace_back(shape, std::move(data));
  }
  return Dataset(std::move(samples), split);
}

Dataset load_png_dir(const fs::path &path, const LoadOptions &options) {
  if (!fs::is_directory(path)) {
    throw IoError(fmt::format("'{}' is not a directory", path.string()));
  }
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  if (files.empty()) throw IoError(fmt::format("'{}' contains no PNG files", path.string()));
  std::sort(files.begin(), files.end(),
            [](const fs::path &a, const fs::path &b) { return a.filename().string() < b.filename().string(); });
  std::vector<ImageSample> samples;
  samples.reserve(files.size());
  for (const auto &f : files) samples.push_back(load_png(f, options.channels));
  return Dataset(std::move(samples), options.split);
}

}  // namespace

Dataset load_dataset(const fs::path &path, DatasetFormat format, const LoadOptions &options) {
  if (!fs::exists(path)) throw IoError(fmt::format("missing path '{}'", path.string()));
  switch (format) {
    case DatasetFormat::kPngDir: return load_png_dir(path, options);
    case DatasetFormat::kRawTensor: {
      Dataset d = load_raw_tensor(path, options.split);
      if (options.channels && *options.channels != d.shape().channels) {
        throw FormatError(fmt::format("'{}': {} channels, config requires {}", path.string(),
                                      d.shape().channels, *options.channels));
      }
      return d;
    }
  }
  throw InvalidArgument("unknown dataset format");
}

void save_raw_tensor(std::span<const ImageSample> samples, const fs::path &path) {
  if (samples.empty()) throw InvalidArgument("cannot save an empty tensor");
  const Shape shape = samples.front().shape();
  std::string out(kRawMagic, 4);
  append_u32_le(out, 4);
  append_u32_le(out, static_cast<std::uint32_t>(samples.size()));
  append_u32_le(out, static_cast<std::uint32_t>(shape.height));
  append_u32_le(out, static_cast<std::uint32_t>(shape.width));
  append_u32_le(out, static_cast<std::uint32_t>(shape.channels));
  out.reserve(out.size() + samples.size() * shape.size() * 4);
  for (const auto &s : samples) {
    if (s.shape() != shape) throw InvalidArgument("samples differ in shape");
    for (float v : s.data()) append_u32_le(out, std::bit_cast<std::uint32_t>(v));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot write '{}'", path.string()));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

ImageSample load_png(const fs::path &path, std::optional<int> channels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw FormatError(fmt::format("'{}': undecodable PNG ({})", path.string(), image.message));
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int src_channels = color ? 3 : 1;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError(fmt::format("'{}': undecodable PNG ({})", path.string(), msg));
  }
  const int h = static_cast<int>(image.height);
  const int w = static_cast<int>(image.width);
  int out_channels = src_channels;
  if (channels) {
    if (*channels == 3 && src_channels == 1) {
      out_channels = 3;
    } else if (*channels != src_channels) {
      throw FormatError(fmt::format("'{}': {} channels, config requires {}", path.string(),
                                    src_channels, *channels));
    }
  }
  std::vector<float> data(static_cast<std::size_t>(h) * w * out_channels);
  for (std::size_t px = 0; px < static_cast<std::size_t>(h) * w; ++px) {
    for (int c = 0; c < out_channels; ++c) {
      const int src_c = src_channels == 1 ? 0 : c;
      data[px * out_channels + c] = static_cast<float>(buffer[px * src_channels + src_c]) / 255.0f;
    }
  }
  return ImageSample(Shape{h, w, out_channels}, std::move(data));
}

void save_sample_grid(std::span<const ImageSample> samples, int columns, const fs::path &path) {
  if (samples.empty()) throw InvalidArgument("empty grid");
  if (columns < 1) throw InvalidArgument("grid needs at least one column");
  const Shape s = samples.front().shape();
  if (s.channels != 1 && s.channels != 3) {
    throw InvalidArgument(fmt::format("cannot render {}-channel samples", s.channels));
  }
  const int n = static_cast<int>(samples.size());
  const int rows = (n + columns - 1) / columns;
  const int grid_w = columns * s.width;
  const int grid_h = rows * s.height;
  std::vector<png_byte> pixels(static_cast<std::size_t>(grid_w) * grid_h * s.channels, 0);
  for (int k = 0; k < n; ++k) {
    if (samples[k].shape() != s) throw InvalidArgument("samples differ in shape");
    const int oy = (k / columns) * s.height;
    const int ox = (k % columns) * s.width;
    for (int r = 0; r < s.height; ++r) {
      for (int c = 0; c < s.width; ++c) {
        for (int ch = 0; ch < s.channels; ++ch) {
          const float v = samples[k].at(r, c, ch);
          pixels[(static_cast<std::size_t>(oy + r) * grid_w + (ox + c)) * s.channels + ch] =
              static_cast<png_byte>(std::lround(v * 255.0f));
        }
      }
    }
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(grid_w);
  image.height = static_cast<png_uint_32>(grid_h);
  image.format = s.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw IoError(fmt::format("cannot write '{}' ({})", path.string(), image.message));
  }
}

void save_scores(const ScoreVector &scores, const fs::path &path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot write '{}'", path.string()));
  f << "index,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    f << fmt::format("{},{:.17g}\n", i, scores[i]);
  }
  if (!f) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

ScoreVector load_scores(const fs::path &path) {
  std::ifstream f(path);
  if (!f) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(f, line) || line != "index,score") {
    throw FormatError(fmt::format("'{}' line 1: expected header 'index,score'", path.string()));
  }
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    bool ok = comma != std::string::npos;
    double value = 0.0;
    if (ok) {
      const std::string idx = line.substr(0, comma);
      const std::string val = line.substr(comma + 1);
      char *end = nullptr;
      const unsigned long long parsed_idx = std::strtoull(idx.c_str(), &end, 10);
      ok = !idx.empty() && *end == '\0' && parsed_idx == values.size();
      if (ok) {
        value = std::strtod(val.c_str(), &end);
        ok = !val.empty() && *end == '\0' && std::isfinite(value);
      }
    }
    if (!ok) {
      throw FormatError(fmt::format("'{}' line {}: malformed row '{}'", path.string(), line_no, line));
    }
    values.push_back(value);
  }
  return ScoreVector(std::move(values));
}

}  // namespace evg
