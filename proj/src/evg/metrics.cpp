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
#include "evg/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "evg/error.hpp"

namespace evg {

double auc(const ScoreVector &in_scores, const ScoreVector &out_scores) {
  if (in_scores.empty() || out_scores.empty()) throw InvalidArgument("auc needs non-empty score vectors");
  const std::size_t m = in_scores.size();
  const std::size_t n = out_scores.size();
  // (score, is_outlier)
  std::vector<std::pair<double, bool>> all;
  all.reserve(m + n);
  for (double v : in_scores.values()) all.emplace_back(v, false);
  for (double v : out_scores.values()) all.emplace_back(v, true);
  std::sort(all.begin(), all.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });

  // Twice the outlier rank sum keeps midranks integral.
  long double twice_rank_sum = 0.0L;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    std::size_t outliers = 0;
    while (j < all.size() && all[j].first == all[i].first) {
      outliers += all[j].second ? 1 : 0;
      ++j;
    }
    // Ranks i+1..j share midrank (i+1+j)/2.
    twice_rank_sum += static_cast<long double>(outliers) * static_cast<long double>(i + 1 + j);
    i = j;
  }
  const long double twice_u = twice_rank_sum - static_cast<long double>(n) * static_cast<long double>(n + 1);
  const double u = static_cast<double>(twice_u / 2.0L);
  return u / (static_cast<double>(m) * static_cast<double>(n));
}

std::size_t minrank(const ScoreVector &in_test_scores, const ScoreVector &adversarial_scores) {
  if (in_test_scores.empty() || adversarial_scores.empty()) {
    throw InvalidArgument("minrank needs non-empty score vectors");
  }
  const auto adv = adversarial_scores.values();
  const double s = *std::min_element(adv.begin(), adv.end());
  const auto in = in_test_scores.values();
  return static_cast<std::size_t>(std::count_if(in.begin(), in.end(), [s](double v) { return v < s; }));
}

std::vector<ThresholdPoint> threshold_sweep(const ScoreVector &in_scores, const ScoreVector &out_scores) {
  if (in_scores.empty() || out_scores.empty()) throw InvalidArgument("threshold sweep needs non-empty scores");
  std::vector<double> in(in_scores.values().begin(), in_scores.values().end());
  std::vector<double> out(out_scores.values().begin(), out_scores.values().end());
  std::sort(in.begin(), in.end(), std::greater<>());
  std::sort(out.begin(), out.end(), std::greater<>());
  std::vector<double> thresholds(in);
  thresholds.insert(thresholds.end(), out.begin(), out.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<ThresholdPoint> points;
  points.reserve(thresholds.size());
  std::size_t ai = 0, ao = 0;
  for (double t : thresholds) {
    while (ai < in.size() && in[ai] >= t) ++ai;
    while (ao < out.size() && out[ao] >= t) ++ao;
    points.push_back({t, static_cast<double>(ao) / static_cast<double>(out.size()),
                      static_cast<double>(ai) / static_cast<double>(in.size())});
  }
  return points;
}

Matrix transfer_matrix(std::span<const Detector> detectors,
                       std::span<const std::vector<ImageSample>> worst_case_sets, const Dataset &in_test) {
  if (detectors.empty()) throw InvalidArgument("transfer matrix needs at least one detector");
  if (worst_case_sets.size() != detectors.size()) {
    throw InvalidArgument(fmt::format("{} detectors but {} worst-case sets", detectors.size(),
                                      worst_case_sets.size()));
  }
  for (const auto &d : detectors) {
    if (!d.calibration()) throw InvalidArgument(fmt::format("{} detector is not calibrated", d.name()));
  }
  for (std::size_t i = 0; i < worst_case_sets.size(); ++i) {
    if (worst_case_sets[i].empty()) throw InvalidArgument(fmt::format("worst-case set {} is empty", i));
    for (const auto &s : worst_case_sets[i]) {
      if (s.shape() != in_test.shape()) {
        throw InvalidArgument(fmt::format("worst-case set {} has shape {}, in_test is {}", i,
                                          s.shape().to_string(), in_test.shape().to_string()));
      }
    }
  }
  const std::size_t k = detectors.size();
  std::vector<ScoreVector> in_scores;
  in_scores.reserve(k);
  for (const auto &d : detectors) in_scores.push_back(d.score_batch(in_test.samples()));
  Matrix m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      m[i][j] = auc(in_scores[j], detectors[j].score_batch(worst_case_sets[i]));
    }
  }
  return m;
}

}  // namespace evg
