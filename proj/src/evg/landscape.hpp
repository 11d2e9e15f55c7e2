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
#ifndef EVG_LANDSCAPE_HPP_
#define EVG_LANDSCAPE_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace evg {

// Analytic test functions with known minima. They are used both as image
// detectors (applied to the flattened pixels) and directly as sampler
// energies over physical latent coordinates.
struct Landscape {
  std::string name;
  int min_dim = 1;
  std::function<double(std::span<const double>)> fn;
  std::vector<double> argmin;  // empty when not unique or unbounded
  double min_value = 0.0;

  double operator()(std::span<const double> x) const { return fn(x); }
};

// f(x) = (x0^2 - 1)^2; minima at x0 = +-1 with value 0.
Landscape double_well_1d();

// Constants of the two-basin landscape
//   f(x) = min(|x-a|^2, |x-b|^2 + delta)
//          + ripple * (sin^2(freq (x0-a0)) + sin^2(freq (x1-a1)))
// Unique global minimum 0 at a; a shallower basin around b with floor delta.
// Over [-1,1]^2 the b-branch is active on the half-plane
// x0 + x1 < (|a|^2 - |b|^2 - delta) / (2 (a0 - b0)), about 57% of the square.
struct TwoBasinConstants {
  static constexpr double kA[2] = {0.6, 0.6};
  static constexpr double kB[2] = {-0.4, -0.4};
  static constexpr double kDelta = 0.1;
  static constexpr double kRipple = 0.05;
  static constexpr double kFreq = 6.0;
};
Landscape two_basin_2d();

// f(x) = w . x over the first w.size() coordinates.
Landscape linear_landscape(std::vector<double> weights);

// f(x) = sum_i scale_i (x_i - center_i)^2.
Landscape quadratic_landscape(std::vector<double> center, std::vector<double> scales);

}  // namespace evg

#endif  // EVG_LANDSCAPE_HPP_
