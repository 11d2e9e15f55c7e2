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
#include "evg/report.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "evg/error.hpp"

namespace evg {

namespace fs = std::filesystem;
using nlohmann::json;

double round_sig9(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  return std::strtod(fmt::format("{:.9g}", value).c_str(), nullptr);
}

std::string format_sig9(double value) { return fmt::format("{:.9g}", value); }

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

void round_floats(json &j) {
  if (j.is_number_float()) {
    j = round_sig9(j.get<double>());
  } else if (j.is_structured()) {
    for (auto &child : j) round_floats(child);
  }
}

}  // namespace

std::string dump_stable(const json &j) {
  json copy = j;
  round_floats(copy);
  return copy.dump(2) + "\n";
}

json report_to_json(const EvaluationReport &r) {
  json chains = json::array();
  for (const auto &c : r.chains) {
    json e = {{"chain", c.chain},
              {"best_score", c.best_score},
              {"best_step", c.best_step},
              {"acceptance_count", c.acceptance_count},
              {"evaluations", c.evaluations}};
    if (c.instance) e["instance"] = *c.instance;
    chains.push_back(std::move(e));
  }
  json timings = json::object();
  for (const auto &[k, v] : r.timings) timings[k] = v;
  return json{
      {"schema_version", kReportSchemaVersion},
      {"config", r.config},
      {"config_hash", r.config_hash},
      {"seeds", {{"master", r.master_seed}, {"repeat_index", r.repeat_index}, {"repeat", r.repeat_seed}}},
      {"detector", r.detector_id},
      {"variation", r.variation_id},
      {"datasets", {{"in_test", r.in_dataset_id}, {"out", r.out_dataset_id}}},
      {"clean_auc", r.clean_auc},
      {"adversarial_auc", r.adversarial_auc},
      {"minrank", r.minrank},
      {"n_in_test", r.n_in_test},
      {"n_adversarial", r.n_adversarial},
      {"clamp_warnings", r.clamp_warnings},
      {"chains", std::move(chains)},
      {"grids", r.grid_paths},
      {"timings", std::move(timings)},
  };
}

EvaluationReport report_from_json(const json &j) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw FormatError(fmt::format("unsupported report schema_version {}", j.at("schema_version").dump()));
    }
    EvaluationReport r;
    r.config = j.at("config");
    r.config_hash = j.at("config_hash").get<std::string>();
    r.master_seed = j.at("seeds").at("master").get<std::uint64_t>();
    r.repeat_index = j.at("seeds").at("repeat_index").get<int>();
    r.repeat_seed = j.at("seeds").at("repeat").get<std::uint64_t>();
    r.detector_id = j.at("detector").get<std::string>();
    r.variation_id = j.at("variation").get<std::string>();
    r.in_dataset_id = j.at("datasets").at("in_test").get<std::string>();
    r.out_dataset_id = j.at("datasets").at("out").get<std::string>();
    r.clean_auc = j.at("clean_auc").get<double>();
    r.adversarial_auc = j.at("adversarial_auc").get<double>();
    r.minrank = j.at("minrank").get<std::size_t>();
    r.n_in_test = j.at("n_in_test").get<std::size_t>();
    r.n_adversarial = j.at("n_adversarial").get<std::size_t>();
    r.clamp_warnings = j.at("clamp_warnings").get<long>();
    for (const auto &c : j.at("chains")) {
      ChainSummary s;
      if (c.contains("instance")) s.instance = c.at("instance").get<std::size_t>();
      s.chain = c.at("chain").get<int>();
      s.best_score = c.at("best_score").get<double>();
      s.best_step = c.at("best_step").get<int>();
      s.acceptance_count = c.at("acceptance_count").get<int>();
      s.evaluations = c.at("evaluations").get<int>();
      r.chains.push_back(s);
    }
    r.grid_paths = j.at("grids").get<std::vector<std::string>>();
    for (const auto &[k, v] : j.at("timings").items()) r.timings[k] = v.get<double>();
    return r;
  } catch (const json::exception &e) {
    throw FormatError(fmt::format("malformed report: {}", e.what()));
  }
}

void write_text_file(const fs::path &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot write '{}'", path.string()));
  f << content;
  if (!f) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

void write_report(const EvaluationReport &report, const fs::path &path) {
  write_text_file(path, dump_stable(report_to_json(report)));
}

EvaluationReport load_report(const fs::path &path) {
  std::ifstream f(path);
  if (!f) throw IoError(fmt::format("cannot open '{}'", path.string()));
  json j;
  try {
    f >> j;
  } catch (const json::exception &e) {
    throw FormatError(fmt::format("'{}': {}", path.string(), e.what()));
  }
  return report_from_json(j);
}

void write_score_csv(const ScoreVector &scores, const fs::path &path) {
  std::string out = "index,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) out += fmt::format("{},{}\n", i, format_sig9(scores[i]));
  write_text_file(path, out);
}

void write_report_exports(const EvaluationReport &report, const fs::path &directory) {
  write_score_csv(report.in_scores, directory / "in_scores.csv");
  write_score_csv(report.clean_scores, directory / "clean_scores.csv");
  write_score_csv(report.adversarial_scores, directory / "adversarial_scores.csv");
  if (!report.in_scores.empty() && !report.adversarial_scores.empty()) {
    std::string out = "threshold,tpr,fpr\n";
    for (const auto &p : threshold_sweep(report.in_scores, report.adversarial_scores)) {
      out += fmt::format("{},{},{}\n", format_sig9(p.threshold), format_sig9(p.tpr), format_sig9(p.fpr));
    }
    write_text_file(directory / "threshold_sweep.csv", out);
  }
}

void write_transfer_matrix(const Matrix &matrix, const std::vector<std::string> &names, const fs::path &path) {
  if (names.size() != matrix.size()) throw InvalidArgument("transfer matrix names do not match its size");
  std::string out = "attacked\\scored";
  for (const auto &n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out += names[i];
    for (double v : matrix[i]) out += "," + format_sig9(v);
    out += "\n";
  }
  write_text_file(path, out);
}

}  // namespace evg
