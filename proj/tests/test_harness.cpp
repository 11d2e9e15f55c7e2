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
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "evg/benchmark.hpp"
#include "evg/error.hpp"
#include "evg/harness.hpp"
#include "test_util.hpp"

using namespace evg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path &root) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

// Small blob benchmark plus its evaluate.json, shrunk for unit-test speed.
json small_benchmark(const fs::path &dir) {
  BlobBenchmarkConfig c;
  c.n_train = 120;
  c.n_valid = 40;
  c.n_test = 40;
  c.n_out = 6;
  c.seed = 5;
  write_blob_benchmark(c, dir);
  std::ifstream f(dir / "evaluate.json");
  json j = json::parse(f);
  j["variation"]["max_instances"] = 3;
  j["sampler"] = {{"n_chains", 3}, {"n_steps", 40}};
  return j;
}

void write_json(const json &j, const fs::path &p) {
  std::ofstream f(p);
  f << j.dump(2);
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(EVG_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("unknown keys are rejected with their location") {
    test::TempDir dir;
    auto j = small_benchmark(dir.path());
    j["sampler"]["chains"] = 4;
    CHECK_THROWS_WITH_AS(parse_run_config(j, dir.path(), ConfigMode::kEvaluate),
                         "config 'sampler': unknown key 'chains'", ConfigError);
    j = small_benchmark(dir.path());
    j["extra"] = 1;
    CHECK_THROWS_AS(parse_run_config(j, dir.path(), ConfigMode::kEvaluate), ConfigError);
    j = small_benchmark(dir.path());
    CHECK_THROWS_AS(parse_run_config(j, dir.path(), ConfigMode::kTransfer), ConfigError);
  }

  TEST_CASE("missing dataset paths are named") {
    test::TempDir dir;
    auto j = small_benchmark(dir.path());
    j["out_dataset"]["path"] = "nowhere.evgt";
    try {
      parse_run_config(j, dir.path(), ConfigMode::kEvaluate);
      FAIL("expected a config error");
    } catch (const ConfigError &e) {
      CHECK(std::string(e.what()).find("nowhere.evgt") != std::string::npos);
    }
    CHECK_NOTHROW(parse_run_config(j, dir.path(), ConfigMode::kEvaluate, false));
  }

  TEST_CASE("config parsing details") {
    test::TempDir dir;
    auto j = small_benchmark(dir.path());
    j["sampler"] = {{"preset", "table"}};
    j["detector"] = {{"type", "knn"}, {"k", 3}};
    const auto c = parse_run_config(j, dir.path(), ConfigMode::kEvaluate);
    CHECK(c.sampler.n_chains == 1000);
    CHECK(c.detectors.front().kind == DetectorSpec::Kind::kKnn);
    CHECK(c.detectors.front().k == 3);
    CHECK(c.train.resolved == dir.path() / "train.evgt");
    CHECK(c.resolved_output_dir == dir.path() / "runs");
    j["schema_version"] = 2;
    CHECK_THROWS_AS(parse_run_config(j, dir.path(), ConfigMode::kEvaluate), ConfigError);
    j = small_benchmark(dir.path());
    j["variation"] = {{"type", "linf"}, {"attack", {{"epsilon", 0.05}, {"n_steps", 10}}}};
    CHECK(parse_run_config(j, dir.path(), ConfigMode::kEvaluate).variation.attack.epsilon == 0.05);
    j["variation"] = {{"type", "external"},
                      {"endpoint", {{"transport", "tcp"}, {"port", 9000}, {"command", {"x"}}}}};
    CHECK_THROWS_AS(parse_run_config(j, dir.path(), ConfigMode::kEvaluate), ConfigError);
  }

  TEST_CASE("fixed-clock evaluate is byte identical across runs and thread counts") {
    test::TempDir dir;
    auto j = small_benchmark(dir.path());
    j["n_repeats"] = 2;
    j["output_dir"] = "a";
    const auto c = parse_run_config(j, dir.path(), ConfigMode::kEvaluate);
    const auto ra = run_evaluate(c, {1, true});
    CHECK(ra.run_dir == dir.path() / "a" / "fixed");
    const auto ta = tree(ra.run_dir);
    fs::remove_all(ra.run_dir);
    const auto rb = run_evaluate(c, {0, true});
    CHECK(rb.run_dir == ra.run_dir);
    const auto tb = tree(rb.run_dir);
    CHECK(ta.size() == tb.size());
    for (const auto &[name, bytes] : ta) CHECK_MESSAGE(tb.at(name) == bytes, name);
    for (const auto *f : {"config.json", "aggregate.json", "repeat_0/report.json", "repeat_0/in_scores.csv",
                          "repeat_0/clean_scores.csv", "repeat_0/adversarial_scores.csv",
                          "repeat_0/threshold_sweep.csv", "repeat_0/worst_cases.png", "repeat_1/clean.png"}) {
      CHECK_MESSAGE(ta.count(f) == 1, f);
    }
    const auto rep = load_report(ra.run_dir / "repeat_1" / "report.json");
    CHECK(rep.repeat_index == 1);
    CHECK(rep.n_adversarial == 3);
    CHECK(rep.chains.size() == 9);
    CHECK(rep.timings.at("search_s") == 0.0);
    for (std::size_t i = 0; i < rep.adversarial_scores.size(); ++i) {
      CHECK(rep.adversarial_scores[i] <= rep.clean_scores[i]);
    }
  }

  TEST_CASE("repeats aggregate into mean and standard error") {
    test::TempDir dir;
    auto j = small_benchmark(dir.path());
    j["n_repeats"] = 5;
    j["variation"]["type"] = "color";
    const auto out = run_evaluate(parse_run_config(j, dir.path(), ConfigMode::kEvaluate), {0, true});
    REQUIRE(out.reports.size() == 5);
    const auto &agg = out.aggregate;
    CHECK(agg.at("n_repeats") == 5);
    CHECK(agg.at("runs").size() == 5);
    CHECK(agg.at("adversarial_auc").at("n") == 5);
    double sum = 0.0;
    for (const auto &r : out.reports) sum += r.adversarial_auc;
    CHECK(agg.at("adversarial_auc").at("mean").get<double>() == doctest::Approx(sum / 5.0));
    CHECK(out.reports[0].repeat_seed != out.reports[1].repeat_seed);
  }

  TEST_CASE("timestamped run directories never collide") {
    test::TempDir dir;
    const auto c = parse_run_config(small_benchmark(dir.path()), dir.path(), ConfigMode::kEvaluate);
    const auto a = run_evaluate(c, {});
    const auto b = run_evaluate(c, {});
    CHECK(a.run_dir != b.run_dir);
    CHECK(a.run_dir.parent_path() == b.run_dir.parent_path());
  }

  TEST_CASE("mean_stderr") {
    const auto m = mean_stderr({1.0, 2.0, 3.0, 4.0});
    CHECK(m.at("mean").get<double>() == 2.5);
    CHECK(m.at("stderr").get<double>() == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(mean_stderr({7.0}).at("stderr").get<double>() == 0.0);
    CHECK_THROWS_AS(mean_stderr({}), InvalidArgument);
    CHECK(exit_code_for(ErrorCode::kConfig) == 2);
    CHECK(exit_code_for(ErrorCode::kIo) == 1);
  }

  TEST_CASE("transfer with two identical detectors is symmetric") {
    test::TempDir dir;
    auto j = small_benchmark(dir.path());
    j.erase("detector");
    j["detectors"] = {{{"type", "mahalanobis"}}, {{"type", "mahalanobis"}}};
    const auto out = run_transfer(parse_run_config(j, dir.path(), ConfigMode::kTransfer), {0, true});
    REQUIRE(out.matrix.size() == 2);
    CHECK(out.names == std::vector<std::string>{"mahalanobis", "mahalanobis#1"});
    CHECK(out.matrix[0][0] == out.matrix[1][1]);
    CHECK(out.matrix[0][1] == out.matrix[1][0]);
    CHECK(out.matrix[0][0] == out.matrix[0][1]);
    CHECK(fs::exists(out.run_dir / "transfer_matrix.csv"));
    CHECK(fs::exists(out.run_dir / "worst_cases_1.png"));
    CHECK(fs::exists(out.run_dir / "transfer.json"));
  }

  TEST_CASE("cli exit codes") {
    test::TempDir dir;
    auto j = small_benchmark(dir.path());
    write_json(j, dir / "ok.json");
    CHECK(run_cli("evaluate --config " + (dir / "ok.json").string() + " --fixed-clock") == 0);

    BlobBenchmarkConfig other;
    other.shape = {6, 6, 3};
    other.n_train = 20;
    other.n_valid = 5;
    other.n_test = 5;
    other.n_out = 3;
    write_blob_benchmark(other, dir / "small");
    j["out_dataset"]["path"] = "small/out.evgt";
    write_json(j, dir / "mismatch.json");
    CHECK(run_cli("evaluate --config " + (dir / "mismatch.json").string()) == 2);
    CHECK(run_cli("evaluate --config " + (dir / "absent.json").string()) != 0);
    CHECK(run_cli("evaluate") == 2);
    CHECK(run_cli("--version") == 0);
  }
}
