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
// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "evg/benchmark.hpp"
#include "evg/detectors.hpp"
#include "evg/landscape.hpp"
#include "evg/linf_attack.hpp"
#include "evg/metrics.hpp"
#include "evg/sampler.hpp"
#include "evg/variation.hpp"

using namespace evg;

namespace {

constexpr double kStationarityTv = 0.05;
constexpr int kGlobalHitsMin = 95;
constexpr int kDescentHitsMax = 60;
constexpr double kGlobalTol = 1e-2;
constexpr double kLocalBasinMin = 0.40;
constexpr double kCleanAucMin = 0.99;
constexpr double kAdversarialAucMax = 0.5;
constexpr double kGridRel = 0.05;
constexpr double kGridFractionMin = 0.90;
constexpr double kLinfRel = 0.01;
constexpr double kMhTol = 1e-12;

struct Outcome {
  bool passed;
  std::string detail;
};

// Criterion 1.
Outcome stationarity() {
  constexpr double lo = -2.0, hi = 2.0;
  constexpr int bins = 20, burn_in = 500;
  const auto energy = double_well_1d();
  const LandscapeObjective target(energy, LatentDomain::box({{lo, hi}}), 1.0);
  SamplerConfig c;
  c.n_chains = 500;
  c.n_steps = 600;
  c.seed = 20260101;
  c.keep_trace = true;
  const auto states = post_burn_in_states(run_search(target, c).chains, burn_in);

  std::vector<double> hist(bins, 0.0);
  for (const auto &z : states) {
    const double x = target.domain().to_physical(z.coords)[0];
    hist[std::clamp(static_cast<int>((x - lo) / (hi - lo) * bins), 0, bins - 1)] += 1.0;
  }
  // Gauss-Legendre, 5 nodes on 16 panels per bin.
  static const double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                  0.9061798459386640};
  static const double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};
  std::vector<double> mass(bins, 0.0);
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + (hi - lo) * b / bins, w = (hi - lo) / bins / 16.0;
    for (int p = 0; p < 16; ++p) {
      const double mid = a + w * (p + 0.5);
      for (int k = 0; k < 5; ++k) {
        const double x = mid + 0.5 * w * nodes[k];
        mass[b] += 0.5 * w * weights[k] * std::exp(-energy(std::span<const double>(&x, 1)));
      }
    }
    total += mass[b];
  }
  double tv = 0.0;
  for (int b = 0; b < bins; ++b) tv += std::abs(hist[b] / static_cast<double>(states.size()) - mass[b] / total);
  tv *= 0.5;
  return {tv <= kStationarityTv, fmt::format("TV {:.4f} over {} states (limit {})", tv, states.size(),
                                             kStationarityTv)};
}

// Criterion 2.
Outcome global_vs_descent() {
  const auto land = two_basin_2d();
  const auto domain = LatentDomain::box({{-1, 1}, {-1, 1}});
  const LandscapeObjective target(land, domain, 1.0);

  // Share of the init box where the local paraboloid is the active branch,
  // on a 100x100 midpoint grid.
  int local = 0;
  constexpr int g = 100;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const std::vector<double> x = {-1.0 + (i + 0.5) * 2.0 / g, -1.0 + (j + 0.5) * 2.0 / g};
      const double da = std::pow(x[0] - TwoBasinConstants::kA[0], 2) + std::pow(x[1] - TwoBasinConstants::kA[1], 2);
      const double db = std::pow(x[0] - TwoBasinConstants::kB[0], 2) + std::pow(x[1] - TwoBasinConstants::kB[1], 2);
      local += db + TwoBasinConstants::kDelta < da;
    }
  }
  const double local_share = static_cast<double>(local) / (g * g);

  SamplerConfig c;
  c.n_chains = 100;
  c.n_steps = 500;
  int mh = 0, cd = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    c.seed = seed;
    if (run_search(target, c).best_score - land.min_value <= kGlobalTol) ++mh;
    CoordinateDescentConfig d;
    d.max_evaluations = evaluation_budget(c);
    d.seed = seed;
    if (coordinate_descent_baseline(target, d).best_score - land.min_value <= kGlobalTol) ++cd;
  }
  const bool ok = mh >= kGlobalHitsMin && cd <= kDescentHitsMax && local_share > kLocalBasinMin;
  return {ok, fmt::format("sampler {}/100 (need >= {}), coordinate descent {}/100 (need <= {}), local basin "
                          "share {:.2f}",
                          mh, kGlobalHitsMin, cd, kDescentHitsMax, local_share)};
}

// Criterion 3.
Outcome metric_oracles() {
  std::mt19937_64 rng(0xac3);
  std::uniform_int_distribution<int> size(1, 200), levels(1, 400);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const int m = size(rng), n = size(rng);
    std::uniform_int_distribution<int> v(0, levels(rng));
    std::vector<double> in(m), out(n);
    for (auto &x : in) x = v(rng) * 0.125;
    for (auto &x : out) x = v(rng) * 0.125;
    double wins = 0.0;
    for (double o : out) {
      for (double i : in) wins += o > i ? 1.0 : (o == i ? 0.5 : 0.0);
    }
    const double brute = wins / (static_cast<double>(m) * n);
    const double lowest = *std::min_element(out.begin(), out.end());
    std::size_t below = 0;
    for (double i : in) below += i < lowest;
    if (auc(ScoreVector(in), ScoreVector(out)) != brute || minrank(ScoreVector(in), ScoreVector(out)) != below) {
      ++bad;
    }
  }
  return {bad == 0, fmt::format("{} mismatches in 1000 trials", bad)};
}

// Criterion 4.
Outcome blob_benchmark() {
  BlobBenchmarkConfig bc;
  bc.seed = 7;
  const auto b = make_blob_benchmark(bc);
  const auto det = calibrate(fit_mahalanobis(b.train), b.valid);
  const auto in = det.score_batch(b.test.samples());
  const double clean = auc(in, det.score_batch(b.out.samples()));

  constexpr std::size_t instances = 20;
  SamplerConfig c;
  c.n_chains = 500;
  c.n_steps = 2000;
  c.seed = 1;
  const auto res = run_instance_conditional_suite(det, b.out, InstanceModel::kAffine, c, instances);
  std::vector<double> worst;
  int above_clean = 0, near_grid = 0;
  double worst_ratio = 0.0;
  for (const auto &r : res) {
    worst.push_back(r.worst_score);
    above_clean += r.worst_score > r.clean_score;

    const AffineModel model(b.out[r.index]);
    std::vector<LatentCode> codes;
    codes.reserve(59049);
    for (int k = 0; k < 59049; ++k) {
      LatentCode z;
      for (int q = k, j = 0; j < 5; ++j, q /= 9) z.coords.push_back(-1.0 + 0.25 * (q % 9));
      codes.push_back(std::move(z));
    }
    const auto grid = det.raw_scores(model.generate_batch(codes));
    const double g = *std::min_element(grid.values().begin(), grid.values().end());
    const double found = det.unstandardize(r.worst_score);
    near_grid += found <= g + kGridRel * std::abs(g);
    worst_ratio = std::max(worst_ratio, found / g);
  }
  const double adversarial = auc(in, ScoreVector(worst));
  const double share = static_cast<double>(near_grid) / static_cast<double>(res.size());
  const bool ok = clean >= kCleanAucMin && adversarial <= kAdversarialAucMax && above_clean == 0 &&
                  share >= kGridFractionMin;
  return {ok, fmt::format("clean AUC {:.4f}, adversarial AUC {:.4f}, {} worst > clean, {}/{} within {}% of grid "
                          "optimum (max ratio {:.3f})",
                          clean, adversarial, above_clean, near_grid, res.size(), kGridRel * 100, worst_ratio)};
}

// Criterion 5.
Outcome identity() {
  std::mt19937_64 rng(0x1d);
  std::uniform_int_distribution<int> side(1, 16), ch(1, 4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    const Shape shape{side(rng), side(rng), t % 2 ? 3 : ch(rng)};
    std::vector<float> px(shape.size());
    for (auto &v : px) v = u(rng);
    const ImageSample base(shape, px);
    bad += !(apply_affine(base, AffineParams{}) == base);
    bad += !(apply_color(base, ColorParams{}) == base);
    const AffineModel am(base);
    const ColorModel cm(base);
    bad += !(am.generate(*am.identity_code()) == base);
    bad += !(cm.generate(*cm.identity_code()) == base);
  }
  return {bad == 0, fmt::format("{} non-identical outputs over 100 images", bad)};
}

// Wraps w.x and records any evaluated point that leaves the ball or [0,1].
class CheckedLinear final : public ScoreModel {
 public:
  CheckedLinear(std::vector<double> w, std::vector<float> base, double eps)
      : w_(std::move(w)), base_(std::move(base)), eps_(eps) {}
  DetectorKind kind() const override { return DetectorKind::kSyntheticLandscape; }
  std::string name() const override { return "checked_linear"; }
  std::optional<Shape> input_shape() const override { return std::nullopt; }
  std::vector<double> raw_batch(std::span<const ImageSample> samples) const override {
    std::vector<double> out;
    for (const auto &s : samples) {
      const auto x = s.data();
      double f = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        f += w_[i] * x[i];
        if (checking && (x[i] < 0.0f || x[i] > 1.0f || std::abs(static_cast<double>(x[i]) - base_[i]) > eps_ + 1e-7)) {
          ++violations;
        }
      }
      out.push_back(f);
    }
    return out;
  }
  bool checking = false;
  mutable std::atomic<long> violations{0};

 private:
  std::vector<double> w_;
  std::vector<float> base_;
  double eps_;
};

// Criterion 6.
Outcome linf_linear() {
  const Shape shape{4, 4, 3};
  constexpr double eps = 0.01;
  std::mt19937_64 rng(0x11f);
  std::uniform_real_distribution<double> wd(-2.0, 2.0);
  std::uniform_real_distribution<float> interior(0.1f, 0.9f), any(0.0f, 1.0f);
  double worst_gap = 0.0;
  long violations = 0;
  bool ok = true;
  for (int t = 0; t < 5; ++t) {
    std::vector<double> w(shape.size());
    for (auto &v : w) v = wd(rng);
    std::vector<float> base(shape.size());
    for (auto &v : base) v = interior(rng);
    auto model = std::make_shared<CheckedLinear>(w, base, eps);
    std::vector<ImageSample> valid;
    for (int i = 0; i < 50; ++i) {
      std::vector<float> px(shape.size());
      for (auto &v : px) v = any(rng);
      valid.emplace_back(shape, px);
    }
    const auto det = calibrate(Detector(model), Dataset(valid, Split::kValid));
    model->checking = true;
    AttackConfig c;
    c.epsilon = eps;
    c.seed = static_cast<std::uint64_t>(t);
    const ImageSample x0(shape, base);
    const auto r = linf_attack(det, x0, c);
    model->checking = false;
    double f0 = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      f0 += w[i] * base[i];
      l1 += std::abs(w[i]);
    }
    const double optimum = f0 - eps * l1;
    const double got = det.unstandardize(r.f_adv);
    const double gap = (got - optimum) / std::abs(optimum);
    worst_gap = std::max(worst_gap, gap);
    violations += model->violations.load();
    ok = ok && gap <= kLinfRel && got >= optimum - 1e-4 * std::abs(optimum);
  }
  ok = ok && violations == 0;
  return {ok, fmt::format("max relative gap to optimum {:.2e} (limit {}), {} invariant violations over 5 cases",
                          worst_gap, kLinfRel, violations)};
}

// Criterion 7.
Outcome mh_values() {
  const double cases[][4] = {
      {0.0, 0.5, 1.0, std::exp(-0.5)}, {1.0, 0.0, 1.0, 1.0}, {2.0, 2.0, 1.0, 1.0},
      {0.0, 1.0, 2.0, std::exp(-0.5)}, {3.0, -1.0, 0.1, 1.0}, {0.0, 0.05, 0.1, std::exp(-0.5)},
  };
  double err = 0.0;
  for (const auto &c : cases) err = std::max(err, std::abs(mh_acceptance_probability(c[0], c[1], c[2]) - c[3]));
  const double v = mh_acceptance_probability(0.0, 0.5, 1.0);
  return {err <= kMhTol && std::abs(v - 0.6065306597126334) <= kMhTol,
          fmt::format("max error {:.1e}, p(0 -> 0.5) = {:.10f}", err, v)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"sampler stationarity", stationarity},   {"global solution vs coordinate descent", global_vs_descent},
      {"metric oracles", metric_oracles},       {"miniature blob benchmark", blob_benchmark},
      {"identity invariants", identity},        {"linf attack on linear detectors", linf_linear},
      {"acceptance probability values", mh_values},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o.detail = fmt::format("error: {}", e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.1fs]\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), s);
    std::fflush(stdout);
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
