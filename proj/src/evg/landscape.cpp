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
#include "evg/landscape.hpp"

#include <algorithm>
#include <cmath>

#include "evg/error.hpp"

namespace evg {

Landscape double_well_1d() {
  Landscape l;
  l.name = "double_well_1d";
  l.min_dim = 1;
  l.fn = [](std::span<const double> x) {
    const double t = x[0] * x[0] - 1.0;
    return t * t;
  };
  l.min_value = 0.0;
  return l;
}

Landscape two_basin_2d() {
  using K = TwoBasinConstants;
  Landscape l;
  l.name = "two_basin_2d";
  l.min_dim = 2;
  l.fn = [](std::span<const double> x) {
    const double da0 = x[0] - K::kA[0], da1 = x[1] - K::kA[1];
    const double db0 = x[0] - K::kB[0], db1 = x[1] - K::kB[1];
    const double basin = std::min(da0 * da0 + da1 * da1, db0 * db0 + db1 * db1 + K::kDelta);
    const double s0 = std::sin(K::kFreq * da0), s1 = std::sin(K::kFreq * da1);
    return basin + K::kRipple * (s0 * s0 + s1 * s1);
  };
  l.argmin = {K::kA[0], K::kA[1]};
  l.min_value = 0.0;
  return l;
}

Landscape linear_landscape(std::vector<double> weights) {
  if (weights.empty()) throw InvalidArgument("linear landscape needs weights");
  Landscape l;
  l.name = "linear";
  l.min_dim = static_cast<int>(weights.size());
  l.fn = [w = std::move(weights)](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
    return s;
  };
  return l;
}

Landscape quadratic_landscape(std::vector<double> center, std::vector<double> scales) {
  if (center.empty() || center.size() != scales.size()) {
    throw InvalidArgument("quadratic landscape needs matching center and scales");
  }
  for (double s : scales) {
    if (!(s > 0.0)) throw InvalidArgument("quadratic scales must be positive");
  }
  Landscape l;
  l.name = "quadratic";
  l.min_dim = static_cast<int>(center.size());
  l.argmin = center;
  l.min_value = 0.0;
  l.fn = [c = std::move(center), s = std::move(scales)](std::span<const double> x) {
    double f = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) f += s[i] * (x[i] - c[i]) * (x[i] - c[i]);
    return f;
  };
  return l;
}

}  // namespace evg
