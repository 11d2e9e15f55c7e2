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
#ifndef EVG_HARNESS_HPP_
#define EVG_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evg/detectors.hpp"
#include "evg/error.hpp"
#include "evg/linf_attack.hpp"
#include "evg/metrics.hpp"
#include "evg/remote.hpp"
#include "evg/report.hpp"
#include "evg/sampler.hpp"

namespace evg {

inline constexpr int kConfigSchemaVersion = 1;

struct DatasetSpec {
  std::string path;  // as written in the config, used as the dataset id
  std::filesystem::path resolved;
  DatasetFormat format = DatasetFormat::kRawTensor;
  std::optional<int> channels;
};

struct DetectorSpec {
  enum class Kind { kMahalanobis, kKnn, kKernelEnergy, kExternal };
  Kind kind = Kind::kMahalanobis;
  int k = 5;
  double bandwidth = 0.0;
  EndpointSpec endpoint;

  std::string id() const;
};

struct VariationSpec {
  enum class Kind { kAffine, kColor, kExternal, kLinf };
  Kind kind = Kind::kAffine;
  std::size_t max_instances = 0;  // 0: every out sample
  double temperature = 1.0;
  EndpointSpec endpoint;
  DomainKind domain = DomainKind::kUnitSphere;
  AttackConfig attack;

  std::string id() const;
};

struct RunConfig {
  nlohmann::json raw;
  DatasetSpec train, valid, test, out;
  std::vector<DetectorSpec> detectors;
  VariationSpec variation;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
  int n_repeats = 1;
  std::string output_dir;
  std::filesystem::path resolved_output_dir;
  int grid_columns = 8;
  std::size_t grid_max = 64;
};

enum class ConfigMode { kEvaluate, kTransfer };

// Throws ConfigError on unknown keys, wrong types, out-of-range values and,
// with check_paths, on dataset paths that do not exist. Relative paths are
// taken relative to base_dir.
RunConfig parse_run_config(const nlohmann::json &j, const std::filesystem::path &base_dir, ConfigMode mode,
                           bool check_paths = true);
RunConfig load_run_config(const std::filesystem::path &path, ConfigMode mode);

struct RunOptions {
  std::size_t threads = 0;  // 0: all cores
  bool fixed_clock = false;  // run directory "fixed", zero timings
};

// Samples and scores produced by one attack or search against one detector.
struct AttackOutcome {
  std::vector<ImageSample> clean_samples;
  ScoreVector clean_scores;
  std::vector<ImageSample> adversarial_samples;
  ScoreVector adversarial_scores;
  std::vector<ChainSummary> chains;
  long clamp_warnings = 0;
};

AttackOutcome run_attack(const Detector &detector, const Dataset &out, const VariationSpec &variation,
                         const SamplerConfig &sampler, std::uint64_t repeat_seed,
                         ExternalGeneratorModel *generator = nullptr);

struct EvaluateOutcome {
  std::filesystem::path run_dir;
  std::vector<EvaluationReport> reports;
  nlohmann::json aggregate;
};

// Writes <output_dir>/<stamp>/{config.json, aggregate.json, repeat_<k>/...}.
EvaluateOutcome run_evaluate(const RunConfig &config, const RunOptions &options);

struct TransferOutcome {
  std::filesystem::path run_dir;
  std::vector<std::string> names;
  Matrix matrix;
};

// Writes <output_dir>/<stamp>/{config.json, transfer_matrix.csv, transfer.json}.
TransferOutcome run_transfer(const RunConfig &config, const RunOptions &options);

// Mean and standard error (sample std / sqrt(n); 0 for n = 1).
nlohmann::json mean_stderr(const std::vector<double> &values);

// 2 for configuration problems, 1 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace evg

#endif  // EVG_HARNESS_HPP_
