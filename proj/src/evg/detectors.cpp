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
#include "evg/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "evg/error.hpp"
#include "evg/parallel.hpp"

namespace evg {

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kMahalanobis: return "mahalanobis";
    case DetectorKind::kKnn: return "knn";
    case DetectorKind::kKernelEnergy: return "kernel_energy";
    case DetectorKind::kSyntheticLandscape: return "synthetic_landscape";
    case DetectorKind::kExternal: return "external";
  }
  return "unknown";
}

Detector::Detector(std::shared_ptr<const ScoreModel> model, std::optional<Calibration> calibration)
    : model_(std::move(model)), calibration_(calibration) {
  if (!model_) throw InvalidArgument("detector needs a score model");
  if (calibration_ && !(calibration_->std > 0.0 && std::isfinite(calibration_->std))) {
    throw InvalidArgument("calibration std must be positive");
  }
}

void Detector::check_shapes(std::span<const ImageSample> samples) const {
  const auto expected = model_->input_shape();
  if (!expected) return;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].shape() != *expected) {
      throw InvalidArgument(fmt::format("{} detector expects {}, sample {} is {}", name(),
                                        expected->to_string(), i, samples[i].shape().to_string()));
    }
  }
}

ScoreVector Detector::raw_scores(std::span<const ImageSample> samples) const {
  if (samples.empty()) return ScoreVector();
  check_shapes(samples);
  std::vector<double> raw = model_->raw_batch(samples);
  if (raw.size() != samples.size()) {
    throw RuntimeError(fmt::format("{} detector returned {} scores for {} samples", name(),
                                   raw.size(), samples.size()));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw NumericError(fmt::format("{} detector returned a non-finite score at batch index {}",
                                     name(), i));
    }
  }
  return ScoreVector(std::move(raw));
}

ScoreVector Detector::score_batch(std::span<const ImageSample> samples) const {
  ScoreVector raw = raw_scores(samples);
  if (!calibration_) return raw;
  std::vector<double> out(raw.values().begin(), raw.values().end());
  for (double &v : out) v = standardize(v);
  return ScoreVector(std::move(out));
}

double Detector::score(const ImageSample &sample) const {
  return score_batch(std::span<const ImageSample>(&sample, 1))[0];
}

double Detector::standardize(double raw) const {
  return calibration_ ? (raw - calibration_->mean) / calibration_->std : raw;
}

double Detector::unstandardize(double standardized) const {
  return calibration_ ? standardized * calibration_->std + calibration_->mean : standardized;
}

Eigen::MatrixXd flatten(std::span<const ImageSample> samples) {
  if (samples.empty()) return {};
  const auto d = static_cast<Eigen::Index>(samples.front().size());
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(samples.size()), d);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (static_cast<Eigen::Index>(samples[i].size()) != d) {
      throw InvalidArgument("samples differ in size");
    }
    const auto data = samples[i].data();
    for (Eigen::Index j = 0; j < d; ++j) rows(static_cast<Eigen::Index>(i), j) = data[j];
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Mahalanobis

std::shared_ptr<MahalanobisModel> MahalanobisModel::fit(const Eigen::MatrixXd &rows,
                                                        std::optional<Shape> shape) {
  if (rows.rows() < 2) throw InvalidArgument("mahalanobis fit needs at least 2 samples");
  auto m = std::shared_ptr<MahalanobisModel>(new MahalanobisModel());
  m->shape_ = shape;
  const auto n = static_cast<double>(rows.rows());
  const auto d = rows.cols();
  m->mean_ = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - m->mean_.transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / (n - 1.0));
  cov = cov.selfadjointView<Eigen::Lower>();
  const double trace = cov.trace();
  if (!(trace > 0.0)) throw NumericError("mahalanobis fit: training data has zero variance");
  m->ridge_ = 1e-4 * trace / static_cast<double>(d);
  cov.diagonal().array() += m->ridge_;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("mahalanobis fit: covariance not positive definite");
  m->chol_lower_ = llt.matrixL();
  return m;
}

std::vector<double> MahalanobisModel::score_rows(const Eigen::MatrixXd &rows) const {
  if (rows.cols() != mean_.size()) {
    throw InvalidArgument(fmt::format("mahalanobis expects dimension {}, got {}", mean_.size(), rows.cols()));
  }
  // |L^-1 (x - mu)|^2, non-negative by construction.
  Eigen::MatrixXd centered = (rows.rowwise() - mean_.transpose()).transpose();
  chol_lower_.triangularView<Eigen::Lower>().solveInPlace(centered);
  const Eigen::VectorXd s = centered.colwise().squaredNorm().transpose();
  return {s.data(), s.data() + s.size()};
}

std::vector<double> MahalanobisModel::raw_batch(std::span<const ImageSample> samples) const {
  constexpr std::size_t kChunk = 64;
  std::vector<double> out(samples.size());
  const std::size_t chunks = (samples.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(samples.size(), begin + kChunk);
    const auto s = score_rows(flatten(samples.subspan(begin, end - begin)));
    std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
  });
  return out;
}

Detector fit_mahalanobis(const Dataset &train) {
  if (train.size() < 2) throw InvalidArgument("mahalanobis fit needs at least 2 samples");
  return Detector(MahalanobisModel::fit(flatten(train.samples()), train.shape()));
}

// ---------------------------------------------------------------------------
// k-nearest neighbours

namespace {

class KnnModel final : public ScoreModel {
 public:
  KnnModel(Eigen::MatrixXf rows, int k, Shape shape) : rows_(std::move(rows)), k_(k), shape_(shape) {}

  DetectorKind kind() const override { return DetectorKind::kKnn; }
  std::string name() const override { return fmt::format("knn(k={})", k_); }
  std::optional<Shape> input_shape() const override { return shape_; }

  std::vector<double> raw_batch(std::span<const ImageSample> samples) const override {
    std::vector<double> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
      const auto data = samples[i].data();
      const Eigen::Map<const Eigen::RowVectorXf> x(data.data(), static_cast<Eigen::Index>(data.size()));
      std::vector<double> d2(static_cast<std::size_t>(rows_.rows()));
      for (Eigen::Index r = 0; r < rows_.rows(); ++r) {
        d2[static_cast<std::size_t>(r)] = (rows_.row(r) - x).cast<double>().squaredNorm();
      }
      auto kth = d2.begin() + (k_ - 1);
      std::nth_element(d2.begin(), kth, d2.end());
      out[i] = std::sqrt(*kth);
    });
    return out;
  }

 private:
  Eigen::MatrixXf rows_;
  int k_;
  Shape shape_;
};

class KernelEnergyModel final : public ScoreModel {
 public:
  KernelEnergyModel(Eigen::MatrixXd rows, double bandwidth, Shape shape)
      : rows_(std::move(rows)), bandwidth_(bandwidth), shape_(shape) {}

  DetectorKind kind() const override { return DetectorKind::kKernelEnergy; }
  std::string name() const override { return "kernel_energy"; }
  std::optional<Shape> input_shape() const override { return shape_; }

  std::vector<double> raw_batch(std::span<const ImageSample> samples) const override {
    const double inv = 1.0 / (2.0 * bandwidth_ * bandwidth_);
    const double log_n = std::log(static_cast<double>(rows_.rows()));
    std::vector<double> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
      const Eigen::RowVectorXd x = flatten(samples.subspan(i, 1)).row(0);
      Eigen::VectorXd e = -(rows_.rowwise() - x).rowwise().squaredNorm() * inv;
      const double m = e.maxCoeff();
      const double lse = m + std::log((e.array() - m).exp().sum());
      out[i] = log_n - lse;
    });
    return out;
  }

 private:
  Eigen::MatrixXd rows_;
  double bandwidth_;
  Shape shape_;
};

class LandscapeModel final : public ScoreModel {
 public:
  explicit LandscapeModel(Landscape landscape) : landscape_(std::move(landscape)) {}

  DetectorKind kind() const override { return DetectorKind::kSyntheticLandscape; }
  std::string name() const override { return landscape_.name; }
  std::optional<Shape> input_shape() const override { return std::nullopt; }

  std::vector<double> raw_batch(std::span<const ImageSample> samples) const override {
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto data = samples[i].data();
      if (data.size() < static_cast<std::size_t>(landscape_.min_dim)) {
        throw InvalidArgument(fmt::format("{} needs at least {} values", landscape_.name, landscape_.min_dim));
      }
      std::vector<double> x(data.begin(), data.end());
      out[i] = landscape_(x);
    }
    return out;
  }

 private:
  Landscape landscape_;
};

}  // namespace

Detector fit_knn(const Dataset &train, int k) {
  if (k < 1) throw InvalidArgument("knn needs k >= 1");
  if (static_cast<std::size_t>(k) > train.size()) {
    throw InvalidArgument(fmt::format("knn k={} exceeds training size {}", k, train.size()));
  }
  Eigen::MatrixXf rows = flatten(train.samples()).cast<float>();
  return Detector(std::make_shared<KnnModel>(std::move(rows), k, train.shape()));
}

Detector fit_kernel_energy(const Dataset &train, double bandwidth) {
  Eigen::MatrixXd rows = flatten(train.samples());
  if (!(bandwidth > 0.0)) {
    const Eigen::Index m = std::min<Eigen::Index>(rows.rows(), 500);
    std::vector<double> dist;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) dist.push_back((rows.row(i) - rows.row(j)).norm());
    }
    if (dist.empty()) throw InvalidArgument("kernel energy bandwidth needs at least 2 samples");
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    bandwidth = *mid;
    if (!(bandwidth > 0.0)) throw NumericError("kernel energy: training samples are identical");
  }
  return Detector(std::make_shared<KernelEnergyModel>(std::move(rows), bandwidth, train.shape()));
}

Detector make_synthetic_landscape(Landscape landscape) {
  return Detector(std::make_shared<LandscapeModel>(std::move(landscape)));
}

Detector calibrate(const Detector &detector, const Dataset &valid) {
  if (valid.size() < 2) throw InvalidArgument("calibration needs at least 2 samples");
  const ScoreVector raw = detector.raw_scores(valid.samples());
  const auto v = raw.values();
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double std = std::sqrt(ss / (n - 1.0));
  if (!(std > 0.0)) throw NumericError("calibration failed: zero variance on validation scores");
  return Detector(detector.model_ptr(), Calibration{mean, std});
}

}  // namespace evg
