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

#include "evg/benchmark.hpp"
#include "evg/detectors.hpp"
#include "evg/error.hpp"
#include "evg/landscape.hpp"
#include "evg/parallel.hpp"
#include "evg/sampler.hpp"
#include "test_util.hpp"

using namespace evg;

namespace {

LandscapeObjective quadratic_objective(double temperature = 1.0) {
  return LandscapeObjective(quadratic_landscape({0.3, -0.2}, {1.0, 4.0}), LatentDomain::box({{-1, 1}, {-1, 1}}),
                            temperature);
}

// Counts evaluations and records the codes it saw.
class CountingObjective final : public Objective {
 public:
  CountingObjective() : Objective(1.0), domain_(LatentDomain::box({{0, 1}, {0, 1}, {0, 1}})) {}
  const LatentDomain &domain() const override { return domain_; }
  std::vector<double> evaluate(std::span<const LatentCode> codes) const override {
    calls += codes.size();
    std::vector<double> out;
    for (const auto &z : codes) {
      if (!domain_.contains(z.coords)) outside = true;
      out.push_back(z.coords[0] * z.coords[0] + z.coords[1]);
    }
    return out;
  }
  mutable std::size_t calls = 0;
  mutable bool outside = false;

 private:
  LatentDomain domain_;
};

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("acceptance probability values") {
    CHECK(std::abs(mh_acceptance_probability(0.0, 0.5, 1.0) - std::exp(-0.5)) <= 1e-12);
    CHECK(mh_acceptance_probability(1.0, 0.25, 1.0) == 1.0);
    CHECK(mh_acceptance_probability(0.7, 0.7, 2.0) == 1.0);
    CHECK(std::abs(mh_acceptance_probability(1.0, 2.0, 0.5) - std::exp(-2.0)) <= 1e-12);
    CHECK(mh_acceptance_probability(0.0, 1e6, 1.0) == doctest::Approx(0.0));
  }

  TEST_CASE("config validation") {
    SamplerConfig c;
    c.n_chains = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = SamplerConfig();
    c.proposal_std = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    CHECK(SamplerConfig::full_preset(1).n_chains == 5000);
    CHECK(SamplerConfig::full_preset(1).n_steps == 2000);
    CHECK(SamplerConfig::table_preset(1).n_chains == 1000);
    CHECK(SamplerConfig().proposal_std == 0.1);
    CHECK_THROWS_AS(quadratic_objective(0.0), InvalidArgument);
  }

  TEST_CASE("search is deterministic and independent of thread count") {
    const auto target = quadratic_objective();
    SamplerConfig c;
    c.n_chains = 16;
    c.n_steps = 200;
    c.seed = 42;
    c.keep_trace = true;
    const auto a = run_search(target, c);
    const auto b = run_search(target, c);
    SearchResult single;
    {
      const ThreadLimit one(1);
      single = run_search(target, c);
    }
    REQUIRE(a.chains.size() == 16);
    for (std::size_t i = 0; i < a.chains.size(); ++i) {
      CHECK(a.chains[i] == b.chains[i]);
      CHECK(a.chains[i] == single.chains[i]);
    }
    c.seed = 43;
    CHECK_FALSE(run_search(target, c).chains[0] == a.chains[0]);
  }

  TEST_CASE("chain i of a search equals run_chain with the derived seed") {
    const auto target = quadratic_objective();
    SamplerConfig c;
    c.n_chains = 4;
    c.n_steps = 50;
    c.seed = 7;
    const auto s = run_search(target, c);
    for (int i = 0; i < 4; ++i) CHECK(s.chains[i] == run_chain(target, c, chain_seed(7, i), i));
  }

  TEST_CASE("best-of-trajectory is the minimum over visited states") {
    const auto target = quadratic_objective();
    SamplerConfig c;
    c.n_chains = 8;
    c.n_steps = 300;
    c.seed = 3;
    c.keep_trace = true;
    const auto s = run_search(target, c);
    for (const auto &ch : s.chains) {
      REQUIRE(ch.trace.size() == 301);
      const auto f = target.evaluate(ch.trace);
      CHECK(*std::min_element(f.begin(), f.end()) == ch.best_score);
      for (std::size_t t = 1; t < ch.best_so_far.size(); ++t) CHECK(ch.best_so_far[t] <= ch.best_so_far[t - 1]);
      CHECK(ch.best_so_far.back() == ch.best_score);
      CHECK(target.evaluate(std::span<const LatentCode>(&ch.best_z, 1))[0] == ch.best_score);
      CHECK(ch.trace[static_cast<std::size_t>(ch.best_step)] == ch.best_z);
    }
    double best = s.chains[0].best_score;
    for (const auto &ch : s.chains) best = std::min(best, ch.best_score);
    CHECK(s.best_score == best);
  }

  TEST_CASE("states never leave the box and rejected proposals are not evaluated") {
    CountingObjective target;
    SamplerConfig c;
    c.n_chains = 10;
    c.n_steps = 400;
    c.proposal_std = 0.8;
    c.keep_trace = true;
    const auto s = run_search(target, c);
    CHECK_FALSE(target.outside);
    std::size_t evals = 0;
    for (const auto &ch : s.chains) {
      evals += static_cast<std::size_t>(ch.evaluations);
      for (const auto &z : ch.trace) CHECK(target.domain().contains(z.coords));
      CHECK(ch.acceptance_count <= ch.evaluations - 1);
    }
    CHECK(evals == target.calls);
    CHECK(evals < 10u * 401u);
  }

  TEST_CASE("sphere chains stay on the sphere") {
    Landscape l;
    l.name = "first_coord";
    l.fn = [](std::span<const double> x) { return x[0]; };
    class Sphere final : public Objective {
     public:
      explicit Sphere(Landscape l) : Objective(0.1), l_(std::move(l)), d_(LatentDomain::unit_sphere(8)) {}
      const LatentDomain &domain() const override { return d_; }
      std::vector<double> evaluate(std::span<const LatentCode> codes) const override {
        std::vector<double> out;
        for (const auto &z : codes) out.push_back(l_(z.coords));
        return out;
      }

     private:
      Landscape l_;
      LatentDomain d_;
    } target(l);
    SamplerConfig c;
    c.n_chains = 4;
    c.n_steps = 300;
    c.keep_trace = true;
    const auto s = run_search(target, c);
    for (const auto &ch : s.chains) {
      for (const auto &z : ch.trace) CHECK(target.domain().contains(z.coords));
    }
    CHECK(s.best_score < -0.9);
  }

  TEST_CASE("low temperature concentrates on the minimum") {
    const auto target = quadratic_objective(0.001);
    SamplerConfig c;
    c.n_chains = 20;
    c.n_steps = 500;
    const auto s = run_search(target, c);
    CHECK(s.best_score < 1e-3);
    const auto phys = target.domain().to_physical(s.best_z.coords);
    CHECK(phys[0] == doctest::Approx(0.3).epsilon(0.1));
  }

  TEST_CASE("post burn-in states and budget") {
    const auto target = quadratic_objective();
    SamplerConfig c;
    c.n_chains = 3;
    c.n_steps = 20;
    c.keep_trace = true;
    const auto s = run_search(target, c);
    CHECK(post_burn_in_states(s.chains, 5).size() == 3u * 15u);
    CHECK(evaluation_budget(c) == 60);
  }

  TEST_CASE("coordinate descent converges on a convex bowl within budget") {
    const auto target = quadratic_objective();
    CoordinateDescentConfig c;
    c.max_evaluations = 5000;
    c.seed = 1;
    const auto r = coordinate_descent_baseline(target, c);
    CHECK(r.converged);
    CHECK(r.best_score < 1e-6);
    CHECK(r.evaluations <= 5000);
    c.max_evaluations = 10;
    const auto limited = coordinate_descent_baseline(target, c);
    CHECK(limited.evaluations == 10);
    CHECK_FALSE(limited.converged);
  }

  TEST_CASE("coordinate descent stays in the basin it starts in") {
    const LandscapeObjective target(two_basin_2d(), LatentDomain::box({{-1, 1}, {-1, 1}}));
    int stuck = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CoordinateDescentConfig c;
      c.max_evaluations = 50000;
      c.seed = seed;
      const auto r = coordinate_descent_baseline(target, c);
      if (r.best_score > 0.05) ++stuck;
    }
    CHECK(stuck > 0);
  }

  TEST_CASE("instance-conditional worst case never exceeds the clean score") {
    BlobBenchmarkConfig bc;
    bc.n_train = 200;
    bc.n_valid = 50;
    bc.n_test = 50;
    bc.n_out = 6;
    const auto b = make_blob_benchmark(bc);
    const auto det = calibrate(fit_mahalanobis(b.train), b.valid);
    SamplerConfig c;
    c.n_chains = 4;
    c.n_steps = 50;
    c.seed = 9;
    for (const auto kind : {InstanceModel::kAffine, InstanceModel::kColor}) {
      const auto res = run_instance_conditional_suite(det, b.out, kind, c, 4);
      REQUIRE(res.size() == 4);
      for (const auto &r : res) {
        CHECK(r.identity_score == doctest::Approx(r.clean_score).epsilon(1e-12));
        CHECK(r.worst_score <= r.clean_score);
        CHECK(det.score(r.worst_sample) == doctest::Approx(r.worst_score).epsilon(1e-9));
        CHECK(r.chains.size() == 4);
      }
      const auto again = run_instance_conditional_suite(det, b.out, kind, c, 4);
      for (std::size_t i = 0; i < res.size(); ++i) CHECK(again[i].worst_z == res[i].worst_z);
    }
  }

  TEST_CASE("adversarial distribution requires calibration and matching shape") {
    const auto b = make_blob_benchmark({});
    const auto raw = fit_mahalanobis(b.train);
    const auto model = make_affine_model(b.out[0]);
    CHECK_THROWS_AS(AdversarialDistribution(raw, *model), InvalidArgument);
    const auto det = calibrate(raw, b.valid);
    const auto other = make_affine_model(ImageSample::filled({4, 4, 3}, 0.5f));
    CHECK_THROWS_AS(AdversarialDistribution(det, *other), InvalidArgument);
  }
}
