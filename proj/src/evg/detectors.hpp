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
#ifndef EVG_DETECTORS_HPP_
#define EVG_DETECTORS_HPP_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "evg/landscape.hpp"
#include "evg/tensor_io.hpp"

namespace evg {

enum class DetectorKind { kMahalanobis, kKnn, kKernelEnergy, kSyntheticLandscape, kExternal };

std::string_view to_string(DetectorKind kind);

// Black-box scoring function: larger means more outlier-like. Implementations
// are immutable once built and may be shared across threads.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual DetectorKind kind() const = 0;
  virtual std::string name() const = 0;
  // Shape the model was fitted on; nullopt accepts any shape.
  virtual std::optional<Shape> input_shape() const = 0;
  // Raw scores; entries may be non-finite, Detector validates them.
  virtual std::vector<double> raw_batch(std::span<const ImageSample> samples) const = 0;
};

struct Calibration {
  double mean = 0.0;
  double std = 1.0;
};

// Value handle: a shared score model plus optional standardization.
class Detector {
 public:
  explicit Detector(std::shared_ptr<const ScoreModel> model,
                    std::optional<Calibration> calibration = std::nullopt);

  DetectorKind kind() const { return model_->kind(); }
  std::string name() const { return model_->name(); }
  std::optional<Shape> input_shape() const { return model_->input_shape(); }
  const std::optional<Calibration> &calibration() const { return calibration_; }
  const ScoreModel &model() const { return *model_; }
  const std::shared_ptr<const ScoreModel> &model_ptr() const { return model_; }

  ScoreVector raw_scores(std::span<const ImageSample> samples) const;
  // Standardized when calibrated, raw otherwise.
  ScoreVector score_batch(std::span<const ImageSample> samples) const;
  double score(const ImageSample &sample) const;

  double standardize(double raw) const;
  double unstandardize(double standardized) const;

 private:
  void check_shapes(std::span<const ImageSample> samples) const;

  std::shared_ptr<const ScoreModel> model_;
  std::optional<Calibration> calibration_;
};

// Rows are flattened samples.
Eigen::MatrixXd flatten(std::span<const ImageSample> samples);

// Squared Mahalanobis distance under the ridge-regularized sample covariance,
// ridge = 1e-4 trace(cov) / D.
class MahalanobisModel final : public ScoreModel {
 public:
  static std::shared_ptr<MahalanobisModel> fit(const Eigen::MatrixXd &rows,
                                               std::optional<Shape> shape = std::nullopt);

  DetectorKind kind() const override { return DetectorKind::kMahalanobis; }
  std::string name() const override { return "mahalanobis"; }
  std::optional<Shape> input_shape() const override { return shape_; }
  std::vector<double> raw_batch(std::span<const ImageSample> samples) const override;

  std::vector<double> score_rows(const Eigen::MatrixXd &rows) const;
  const Eigen::VectorXd &mean() const { return mean_; }
  double ridge() const { return ridge_; }

 private:
  MahalanobisModel() = default;

  std::optional<Shape> shape_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_lower_;
  double ridge_ = 0.0;
};

Detector fit_mahalanobis(const Dataset &train);
// Distance to the k-th nearest training sample.
Detector fit_knn(const Dataset &train, int k);
// Negative log of a Gaussian kernel density estimate; bandwidth <= 0 selects
// the median pairwise distance of (at most 500) training samples.
Detector fit_kernel_energy(const Dataset &train, double bandwidth = 0.0);
Detector make_synthetic_landscape(Landscape landscape);

// Stores mean and sample std (N-1) of raw scores on `valid`.
Detector calibrate(const Detector &detector, const Dataset &valid);

}  // namespace evg

#endif  // EVG_DETECTORS_HPP_
