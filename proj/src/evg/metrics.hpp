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
#ifndef EVG_METRICS_HPP_
#define EVG_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "evg/detectors.hpp"
#include "evg/tensor_io.hpp"

namespace evg {

// P(outlier score > inlier score), ties counted 1/2, via midranks in
// O((m+n) log(m+n)).
double auc(const ScoreVector &in_scores, const ScoreVector &out_scores);

// Number of inlier test scores strictly below the smallest adversarial score.
std::size_t minrank(const ScoreVector &in_test_scores, const ScoreVector &adversarial_scores);

struct ThresholdPoint {
  double threshold;
  double tpr;  // outliers flagged (score >= threshold)
  double fpr;  // inliers flagged
};

// One point per distinct score, descending thresholds.
std::vector<ThresholdPoint> threshold_sweep(const ScoreVector &in_scores, const ScoreVector &out_scores);

using Matrix = std::vector<std::vector<double>>;

// Entry (i, j): AUC of detector j separating in_test from the worst-case set
// found against detector i.
Matrix transfer_matrix(std::span<const Detector> detectors,
                       std::span<const std::vector<ImageSample>> worst_case_sets,
                       const Dataset &in_test);

}  // namespace evg

#endif  // EVG_METRICS_HPP_
