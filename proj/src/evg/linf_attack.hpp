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
#ifndef EVG_LINF_ATTACK_HPP_
#define EVG_LINF_ATTACK_HPP_

#include <cstdint>
#include <vector>

#include "evg/detectors.hpp"

namespace evg {

struct AttackConfig {
  double epsilon = 0.01;
  int n_steps = 20000;
  double momentum = 0.999;
  double step_size = 0.1;  // in units of epsilon
  int halving_period = 2000;
  double fd_delta = 1e-3;
  std::uint64_t seed = 0;
  bool keep_trace = false;

  void validate() const;
};

struct AttackResult {
  ImageSample x_adv;
  double f_adv = 0.0;
  double f_base = 0.0;
  int best_step = 0;
  long evaluations = 0;
  std::vector<double> best_so_far;  // per step, when keep_trace is set
};

// Zeroth-order random coordinate descent with momentum inside the
// l-infinity ball of radius epsilon around `base`, intersected with [0,1]^D.
// Each step picks a coordinate, estimates its partial derivative with a
// two-sided difference whose probes are clipped to the feasible set, and
// moves by step_size * epsilon against the sign of the momentum. The step
// size halves every halving_period steps. Returns the best iterate.
AttackResult linf_attack(const Detector &detector, const ImageSample &base, const AttackConfig &config);

}  // namespace evg

#endif  // EVG_LINF_ATTACK_HPP_
