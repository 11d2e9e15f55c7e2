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
#include "evg/selftest.hpp"

#include <cmath>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "evg/error.hpp"
#include "evg/landscape.hpp"
#include "evg/metrics.hpp"
#include "evg/remote.hpp"
#include "evg/rng.hpp"
#include "evg/sampler.hpp"
#include "evg/variation.hpp"

namespace evg {

namespace {

SuiteResult stationarity() {
  constexpr double kLo = -2.0, kHi = 2.0;
  constexpr int kBins = 20, kBurnIn = 500;
  const LandscapeObjective target(double_well_1d(), LatentDomain::box({{kLo, kHi}}), 1.0);
  SamplerConfig cfg;
  cfg.n_chains = 200;
  cfg.n_steps = 600;
  cfg.seed = 0x5e1f7e57;
  cfg.keep_trace = true;
  const auto result = run_search(target, cfg);
  const auto states = post_burn_in_states(result.chains, kBurnIn);

  std::vector<double> hist(kBins, 0.0);
  for (const auto &z : states) {
    const double x = target.domain().to_physical(z.coords)[0];
    const int b = std::clamp(static_cast<int>((x - kLo) / (kHi - kLo) * kBins), 0, kBins - 1);
    hist[b] += 1.0;
  }
  // Composite Simpson per bin.
  const auto energy = double_well_1d();
  std::vector<double> mass(kBins);
  double total = 0.0;
  constexpr int kSub = 64;
  for (int b = 0; b < kBins; ++b) {
    const double a = kLo + (kHi - kLo) * b / kBins, w = (kHi - kLo) / kBins, h = w / kSub;
    double s = 0.0;
    for (int i = 0; i <= kSub; ++i) {
      const double x = a + h * i;
      const double fx = std::exp(-energy(std::span<const double>(&x, 1)));
      s += fx * (i == 0 || i == kSub ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    mass[b] = s * h / 3.0;
    total += mass[b];
  }
  double tv = 0.0;
  for (int b = 0; b < kBins; ++b) tv += std::abs(hist[b] / static_cast<double>(states.size()) - mass[b] / total);
  tv *= 0.5;
  return {"sampler-stationarity", tv <= 0.05, fmt::format("TV {:.4f} over {} states (limit 0.05)", tv, states.size())};
}

SuiteResult auc_brute_force() {
  Rng rng(0xa0c);
  std::uniform_int_distribution<int> size(1, 60), value(0, 20);
  int trials = 0;
  for (; trials < 300; ++trials) {
    std::vector<double> in(static_cast<std::size_t>(size(rng))), out(static_cast<std::size_t>(size(rng)));
    for (auto &v : in) v = value(rng);
    for (auto &v : out) v = value(rng);
    double wins = 0.0;
    for (double o : out) {
      for (double i : in) wins += o > i ? 1.0 : (o == i ? 0.5 : 0.0);
    }
    const double brute = wins / (static_cast<double>(in.size()) * static_cast<double>(out.size()));
    const double fast = auc(ScoreVector(in), ScoreVector(out));
    const double lo = *std::min_element(out.begin(), out.end());
    const auto count = static_cast<std::size_t>(std::count_if(in.begin(), in.end(), [&](double v) { return v < lo; }));
    if (fast != brute || minrank(ScoreVector(in), ScoreVector(out)) != count) {
      return {"auc-brute-force", false, fmt::format("mismatch in trial {}: {} vs {}", trials, fast, brute)};
    }
  }
  return {"auc-brute-force", true, fmt::format("{} trials exact", trials)};
}

SuiteResult identity_transforms() {
  Rng rng(0x1de);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const Shape shape{9, 7, 3};
  for (int t = 0; t < 20; ++t) {
    std::vector<float> px(shape.size());
    for (auto &v : px) v = u(rng);
    const ImageSample base(shape, px);
    for (const auto &model : {make_affine_model(base), make_color_model(base)}) {
      if (!(model->generate(*model->identity_code()) == base)) {
        return {"identity-transforms", false, fmt::format("{} identity changed image {}", model->name(), t)};
      }
    }
  }
  return {"identity-transforms", true, "20 images, affine and color exact"};
}

SuiteResult protocol_loopback() {
  const Shape shape{4, 4, 3};
  auto [engine_end, adapter_end] = make_socket_pair();
  AdapterHandlers h;
  h.capabilities = {protocol::kVersion, protocol::Role::kDetector, shape, 0};
  h.score = [](std::span<const ImageSample> batch) {
    std::vector<double> out;
    for (const auto &s : batch) {
      double sum = 0.0;
      for (float v : s.data()) sum += v;
      out.push_back(sum / static_cast<double>(s.size()));
    }
    return out;
  };
  std::thread server([t = std::move(adapter_end), &h]() mutable {
    try {
      serve_adapter(*t, h);
    } catch (const Error &) {
    }
  });
  SuiteResult r{"protocol-loopback", false, ""};
  try {
    AdapterConnection conn(std::move(engine_end));
    Rng rng(0x100b);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    double worst = 0.0;
    for (int b = 0; b < 20; ++b) {
      std::vector<ImageSample> batch;
      for (int i = 0; i <= b % 5; ++i) {
        std::vector<float> px(shape.size());
        for (auto &v : px) v = u(rng);
        batch.emplace_back(shape, std::move(px));
      }
      const auto got = conn.score(batch);
      const auto want = h.score(batch);
      for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    }
    r.passed = worst <= 1e-6;
    r.detail = fmt::format("20 batches over a socket pair, max error {:.2e}", worst);
  } catch (const std::exception &e) {
    r.detail = e.what();
  }
  server.join();
  return r;
}

}  // namespace

const std::vector<std::string> &selftest_suites() {
  static const std::vector<std::string> names = {"sampler-stationarity", "auc-brute-force", "identity-transforms",
                                                 "protocol-loopback"};
  return names;
}

std::vector<SuiteResult> run_selftest(bool force_fail, const std::function<void(const SuiteResult &)> &on_result) {
  std::vector<SuiteResult> results;
  SuiteResult (*const suites[])() = {stationarity, auc_brute_force, identity_transforms, protocol_loopback};
  for (std::size_t i = 0; i < std::size(suites); ++i) {
    SuiteResult r{selftest_suites()[i], false, ""};
    try {
      r = suites[i]();
    } catch (const std::exception &e) {
      r.detail = e.what();
    }
    results.push_back(r);
    if (on_result) on_result(results.back());
  }
  if (force_fail) {
    results.push_back({"forced-failure", false, "requested by flag"});
    if (on_result) on_result(results.back());
  }
  return results;
}

}  // namespace evg
