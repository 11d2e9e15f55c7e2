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
#ifndef EVG_REPORT_HPP_
#define EVG_REPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evg/metrics.hpp"

namespace evg {

inline constexpr int kReportSchemaVersion = 1;

// Rounds to 9 significant digits so that serialized floats are byte-stable.
double round_sig9(double value);
std::string format_sig9(double value);

// 64-bit FNV-1a of a string, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

struct ChainSummary {
  std::optional<std::size_t> instance;
  int chain = 0;
  double best_score = 0.0;
  int best_step = 0;
  int acceptance_count = 0;
  int evaluations = 0;

  bool operator==(const ChainSummary &) const = default;
};

struct EvaluationReport {
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  int repeat_index = 0;
  std::uint64_t repeat_seed = 0;
  std::string detector_id;
  std::string variation_id;
  std::string in_dataset_id;
  std::string out_dataset_id;

  double clean_auc = 0.0;
  double adversarial_auc = 0.0;
  std::size_t minrank = 0;
  std::size_t n_in_test = 0;
  std::size_t n_adversarial = 0;
  long clamp_warnings = 0;

  std::vector<ChainSummary> chains;
  std::vector<std::string> grid_paths;
  std::map<std::string, double> timings;

  // Exported as CSV by write_report_exports, not part of the JSON.
  ScoreVector in_scores;
  ScoreVector clean_scores;
  ScoreVector adversarial_scores;
};

nlohmann::json report_to_json(const EvaluationReport &report);
EvaluationReport report_from_json(const nlohmann::json &j);

// Pretty JSON with sorted keys and 9-significant-digit floats.
std::string dump_stable(const nlohmann::json &j);

void write_report(const EvaluationReport &report, const std::filesystem::path &path);
EvaluationReport load_report(const std::filesystem::path &path);

// in_scores.csv, clean_scores.csv, adversarial_scores.csv and
// threshold_sweep.csv under `directory`.
void write_report_exports(const EvaluationReport &report, const std::filesystem::path &directory);

void write_score_csv(const ScoreVector &scores, const std::filesystem::path &path);
void write_transfer_matrix(const Matrix &matrix, const std::vector<std::string> &names,
                           const std::filesystem::path &path);

void write_text_file(const std::filesystem::path &path, const std::string &content);

}  // namespace evg

#endif  // EVG_REPORT_HPP_
