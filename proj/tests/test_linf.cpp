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

#include <cmath>

#include "evg/detectors.hpp"
#include "evg/error.hpp"
#include "evg/landscape.hpp"
#include "evg/linf_attack.hpp"
#include "test_util.hpp"

using namespace evg;

namespace {

struct LinearCase {
  std::vector<double> w;
  Detector detector;
  ImageSample base;
};

LinearCase linear_case(std::uint64_t seed, const Shape &shape) {
  const auto valid = test::random_images(shape, 20, seed + 1);
  const auto base = test::random_images(shape, 1, seed + 2)[0];
  std::vector<double> w(shape.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (auto &v : w) v = u(rng);
  auto det = calibrate(make_synthetic_landscape(linear_landscape(w)), Dataset(valid, Split::kValid));
  return {w, det, base};
}

// Exact minimum of w.x over the clipped box around the base.
double linear_optimum(const std::vector<double> &w, const ImageSample &base, double eps) {
  double s = 0.0;
  const auto b = base.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const float lo = static_cast<float>(std::max(0.0, b[i] - eps));
    const float hi = static_cast<float>(std::min(1.0, b[i] + eps));
    s += w[i] * (w[i] > 0 ? lo : hi);
  }
  return s;
}

}  // namespace

TEST_SUITE("linf") {
  TEST_CASE("config validation") {
    AttackConfig c;
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = AttackConfig();
    c.momentum = 1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = AttackConfig();
    c.halving_period = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    CHECK(AttackConfig().epsilon == 0.01);
    CHECK(AttackConfig().n_steps == 20000);
    CHECK(AttackConfig().momentum == 0.999);
  }

  TEST_CASE("needs a calibrated detector") {
    const Shape shape{2, 2, 3};
    const auto raw = make_synthetic_landscape(linear_landscape(std::vector<double>(12, 1.0)));
    CHECK_THROWS_AS(linf_attack(raw, test::random_images(shape, 1, 1)[0], AttackConfig()), InvalidArgument);
  }

  TEST_CASE("iterate stays in the ball and the pixel range") {
    const Shape shape{3, 3, 3};
    auto lc = linear_case(5, shape);
    std::vector<float> px(shape.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = i % 3 == 0 ? 0.0f : (i % 3 == 1 ? 1.0f : 0.5f);
    lc.base = ImageSample(shape, px);
    AttackConfig c;
    c.epsilon = 0.05;
    c.n_steps = 3000;
    c.keep_trace = true;
    const auto r = linf_attack(lc.detector, lc.base, c);
    for (std::size_t i = 0; i < px.size(); ++i) {
      const float v = r.x_adv.data()[i];
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
      CHECK(std::abs(static_cast<double>(v) - px[i]) <= c.epsilon + 1e-7);
    }
    REQUIRE(r.best_so_far.size() == 3000);
    for (std::size_t t = 1; t < r.best_so_far.size(); ++t) CHECK(r.best_so_far[t] <= r.best_so_far[t - 1]);
    CHECK(r.f_adv <= r.f_base);
    CHECK(lc.detector.score(r.x_adv) == r.f_adv);
  }

  TEST_CASE("reaches the linear optimum") {
    const Shape shape{4, 4, 3};
    const auto lc = linear_case(11, shape);
    AttackConfig c;
    c.epsilon = 0.03;
    c.seed = 4;
    const auto r = linf_attack(lc.detector, lc.base, c);
    const double opt = linear_optimum(lc.w, lc.base, c.epsilon);
    const double got = lc.detector.unstandardize(r.f_adv);
    CHECK(got >= opt - 1e-4);
    CHECK(got - opt <= 0.01 * std::abs(opt));
  }

  TEST_CASE("zero steps returns the base") {
    const Shape shape{2, 2, 3};
    const auto lc = linear_case(2, shape);
    AttackConfig c;
    c.n_steps = 0;
    const auto r = linf_attack(lc.detector, lc.base, c);
    CHECK(r.x_adv == lc.base);
    CHECK(r.evaluations == 1);
  }

  TEST_CASE("deterministic for a seed") {
    const Shape shape{2, 2, 3};
    const auto lc = linear_case(3, shape);
    AttackConfig c;
    c.n_steps = 500;
    c.seed = 8;
    const auto a = linf_attack(lc.detector, lc.base, c);
    const auto b = linf_attack(lc.detector, lc.base, c);
    CHECK(a.x_adv == b.x_adv);
    CHECK(a.evaluations == b.evaluations);
  }
}
