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
#include "evg/linf_attack.hpp"

#include <algorithm>
#include <cmath>

#include "evg/error.hpp"
#include "evg/rng.hpp"

namespace evg {

void AttackConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (n_steps < 0) throw InvalidArgument("n_steps must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0,1)");
  if (!(step_size > 0.0)) throw InvalidArgument("step_size must be positive");
  if (halving_period < 1) throw InvalidArgument("halving_period must be >= 1");
  if (!(fd_delta > 0.0)) throw InvalidArgument("fd_delta must be positive");
}

AttackResult linf_attack(const Detector &detector, const ImageSample &base, const AttackConfig &config) {
  config.validate();
  if (!detector.calibration()) throw InvalidArgument("l-inf attack needs a calibrated detector");
  const Shape shape = base.shape();
  const std::size_t d = base.size();
  const auto b = base.data();

  std::vector<float> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = static_cast<float>(std::max(0.0, b[i] - config.epsilon));
    hi[i] = static_cast<float>(std::min(1.0, b[i] + config.epsilon));
  }

  AttackResult r;
  r.f_base = detector.score(base);
  r.f_adv = r.f_base;
  r.x_adv = base;
  r.evaluations = 1;

  std::vector<float> x(b.begin(), b.end());
  std::vector<double> m(d, 0.0);
  Rng rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, d - 1);

  for (int step = 0; step < config.n_steps; ++step) {
    const double lr = config.step_size * std::ldexp(1.0, -(step / config.halving_period));
    const std::size_t i = pick(rng);
    const float xi = x[i];

    const float up = std::clamp(static_cast<float>(xi + config.fd_delta), lo[i], hi[i]);
    const float down = std::clamp(static_cast<float>(xi - config.fd_delta), lo[i], hi[i]);
    double grad = 0.0;
    if (up != down) {
      std::vector<ImageSample> probes;
      probes.reserve(2);
      x[i] = up;
      probes.emplace_back(shape, x);
      x[i] = down;
      probes.emplace_back(shape, x);
      x[i] = xi;
      const auto f = detector.score_batch(probes);
      r.evaluations += 2;
      grad = (f[0] - f[1]) / (static_cast<double>(up) - static_cast<double>(down));
    }
    m[i] = config.momentum * m[i] + (1.0 - config.momentum) * grad;
    const double direction = (m[i] > 0.0) - (m[i] < 0.0);
    const float moved = std::clamp(static_cast<float>(xi - lr * config.epsilon * direction), lo[i], hi[i]);

    if (moved != xi) {
      x[i] = moved;
      ImageSample current(shape, x);
      const double f = detector.score(current);
      ++r.evaluations;
      if (f < r.f_adv) {
        r.f_adv = f;
        r.x_adv = std::move(current);
        r.best_step = step + 1;
      }
    }
    if (config.keep_trace) r.best_so_far.push_back(r.f_adv);
  }
  return r;
}

}  // namespace evg
