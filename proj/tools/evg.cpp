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
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "evg.h"

namespace {

int fail(evg_status status) {
  std::fprintf(stderr, "evg: %s: %s\n", evg_status_name(status), evg_last_error());
  return evg_exit_code(status);
}

void print_suite(const char *suite, int passed, const char *detail, void *) {
  std::printf("%s %s: %s\n", passed ? "PASS" : "FAIL", suite, detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Worst-case outlier evaluation of OOD detectors"};
  app.set_version_flag("--version", std::string(evg_version()));
  app.require_subcommand(1);

  std::string config;
  std::size_t threads = 0;
  bool fixed_clock = false;

  auto *evaluate = app.add_subcommand("evaluate", "Fit, calibrate and attack one detector; write reports");
  evaluate->add_option("--config", config, "Run config (JSON)")->required();
  evaluate->add_option("--threads", threads, "Worker threads (0 = all cores)");
  evaluate->add_flag("--fixed-clock", fixed_clock, "Deterministic run directory name and zero timings");

  auto *transfer = app.add_subcommand("transfer", "Cross-detector AUC matrix of worst-case sets");
  transfer->add_option("--config", config, "Run config (JSON) with a 'detectors' list")->required();
  transfer->add_option("--threads", threads, "Worker threads (0 = all cores)");
  transfer->add_flag("--fixed-clock", fixed_clock, "Deterministic run directory name");

  bool force_fail = false, list = false;
  auto *selftest = app.add_subcommand("selftest", "Run the built-in oracle suites");
  selftest->add_flag("--list", list, "Print suite names and exit");
  selftest->add_flag("--force-fail", force_fail)->group("");

  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t n_train = 0, n_valid = 0, n_test = 0, n_out = 0;
  auto *blobs = app.add_subcommand("make-blobs", "Write the miniature blob benchmark and a run config");
  blobs->add_option("--output", out_dir, "Output directory")->required();
  blobs->add_option("--seed", seed, "Generator seed");
  blobs->add_option("--n-train", n_train, "Training inliers (default 500)");
  blobs->add_option("--n-valid", n_valid, "Validation inliers (default 200)");
  blobs->add_option("--n-test", n_test, "Test inliers (default 500)");
  blobs->add_option("--n-out", n_out, "Corner outliers (default 100)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const evg_run_options options{threads, fixed_clock ? 1 : 0};
  char run_dir[4096] = {0};

  if (*evaluate || *transfer) {
    const evg_status s = *evaluate ? evg_cmd_evaluate(config.c_str(), &options, run_dir, sizeof(run_dir))
                                   : evg_cmd_transfer(config.c_str(), &options, run_dir, sizeof(run_dir));
    if (s != EVG_OK) return fail(s);
    std::printf("%s\n", run_dir);
    return 0;
  }
  if (*selftest) {
    if (list) {
      for (std::size_t i = 0; i < evg_selftest_suite_count(); ++i) std::printf("%s\n", evg_selftest_suite_name(i));
      return 0;
    }
    int all_passed = 0;
    const evg_status s = evg_selftest(force_fail ? 1 : 0, print_suite, nullptr, &all_passed);
    if (s != EVG_OK) return fail(s);
    return all_passed ? 0 : 1;
  }
  const evg_status s = evg_make_blobs(out_dir.c_str(), seed, n_train, n_valid, n_test, n_out);
  if (s != EVG_OK) return fail(s);
  std::printf("%s\n", out_dir.c_str());
  return 0;
}
