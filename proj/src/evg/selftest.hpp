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
#ifndef EVG_SELFTEST_HPP_
#define EVG_SELFTEST_HPP_

#include <functional>
#include <string>
#include <vector>

namespace evg {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Stable, in run order: sampler-stationarity, auc-brute-force,
// identity-transforms, protocol-loopback.
const std::vector<std::string> &selftest_suites();

// Runs every suite, reporting each result as it completes. force_fail
// appends a failing "forced-failure" entry.
std::vector<SuiteResult> run_selftest(bool force_fail = false,
                                      const std::function<void(const SuiteResult &)> &on_result = {});

}  // namespace evg

#endif  // EVG_SELFTEST_HPP_
