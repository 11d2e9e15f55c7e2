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
#include "evg/sampler.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "evg/error.hpp"
#include "evg/log.hpp"
#include "evg/parallel.hpp"
#include "evg/rng.hpp"

namespace evg {

Objective::Objective(double temperature) : temperature_(temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidArgument("temperature must be positive");
  }
}

AdversarialDistribution::AdversarialDistribution(const Detector &detector, const VariationModel &model,
                                                 double temperature)
    : Objective(temperature), detector_(detector), model_(model) {
  if (!detector.calibration()) {
    throw InvalidArgument(fmt::format("{} detector must be calibrated before searching", detector.name()));
  }
  const auto shape = detector.input_shape();
  if (shape && *shape != model.output_shape()) {
    throw InvalidArgument(fmt::format("{} detector expects {}, {} model produces {}", detector.name(),
                                      shape->to_string(), model.name(), model.output_shape().to_string()));
  }
}

std::vector<double> AdversarialDistribution::evaluate(std::span<const LatentCode> codes) const {
  if (codes.empty()) return {};
  const auto samples = model_.generate_batch(codes);
  const auto scores = detector_.score_batch(samples);
  return {scores.values().begin(), scores.values().end()};
}

std::optional<ImageSample> AdversarialDistribution::materialize(const LatentCode &z) const {
  return model_.generate(z);
}

LandscapeObjective::LandscapeObjective(Landscape landscape, LatentDomain domain, double temperature)
    : Objective(temperature), landscape_(std::move(landscape)), domain_(std::move(domain)) {
  if (domain_.dim() < landscape_.min_dim) {
    throw InvalidArgument(fmt::format("{} needs dim >= {}", landscape_.name, landscape_.min_dim));
  }
}

std::vector<double> LandscapeObjective::evaluate(std::span<const LatentCode> codes) const {
  std::vector<double> out(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) out[i] = landscape_(domain_.to_physical(codes[i].coords));
  return out;
}

SamplerConfig SamplerConfig::full_preset(std::uint64_t seed) {
  SamplerConfig c;
  c.n_chains = 5000;
  c.n_steps = 2000;
  c.seed = seed;
  return c;
}

SamplerConfig SamplerConfig::table_preset(std::uint64_t seed) {
  SamplerConfig c = full_preset(seed);
  c.n_chains = 1000;
  return c;
}

void SamplerConfig::validate() const {
  if (n_chains < 1) throw InvalidArgument("n_chains must be >= 1");
  if (n_steps < 0) throw InvalidArgument("n_steps must be >= 0");
  if (!(proposal_std > 0.0) || !std::isfinite(proposal_std)) {
    throw InvalidArgument("proposal_std must be positive");
  }
}

double mh_acceptance_probability(double f_current, double f_proposed, double temperature) {
  const double log_ratio = (f_current - f_proposed) / temperature;
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(log_ratio);
}

std::uint64_t chain_seed(std::uint64_t master_seed, int chain_index) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(chain_index));
}

namespace {

struct ChainState {
  Rng rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::uniform_real_distribution<double> uniform{0.0, 1.0};
  LatentCode z;
  double f = 0.0;
};

std::vector<ChainRecord> run_lockstep(const Objective &objective, const SamplerConfig &config,
                                      std::span<const std::uint64_t> seeds,
                                      std::span<const int> indices) {
  const LatentDomain &domain = objective.domain();
  const bool sphere = domain.kind() == DomainKind::kUnitSphere;
  const double temperature = objective.temperature();
  const std::size_t n = seeds.size();

  std::vector<ChainState> states(n);
  std::vector<ChainRecord> records(n);
  std::vector<LatentCode> batch(n);
  for (std::size_t i = 0; i < n; ++i) {
    states[i].rng.seed(seeds[i]);
    states[i].z = sample_uniform(domain, states[i].rng);
    batch[i] = states[i].z;
  }
  const auto f0 = objective.evaluate(batch);
  for (std::size_t i = 0; i < n; ++i) {
    states[i].f = f0[i];
    auto &r = records[i];
    r.chain_index = indices[i];
    r.seed = seeds[i];
    r.best_z = states[i].z;
    r.best_score = f0[i];
    r.evaluations = 1;
    if (config.keep_trace) {
      r.trace.reserve(static_cast<std::size_t>(config.n_steps) + 1);
      r.best_so_far.reserve(static_cast<std::size_t>(config.n_steps) + 1);
      r.trace.push_back(states[i].z);
      r.best_so_far.push_back(r.best_score);
    }
  }

  std::vector<LatentCode> proposals;
  std::vector<std::size_t> owners;
  for (int step = 1; step <= config.n_steps; ++step) {
    proposals.clear();
    owners.clear();
    for (std::size_t i = 0; i < n; ++i) {
      auto &s = states[i];
      LatentCode p = s.z;
      for (double &c : p.coords) c += config.proposal_std * s.normal(s.rng);
      if (sphere) {
        double norm2 = 0.0;
        for (double c : p.coords) norm2 += c * c;
        if (norm2 == 0.0) continue;
        const double inv = 1.0 / std::sqrt(norm2);
        for (double &c : p.coords) c *= inv;
      } else if (!domain.contains(p.coords)) {
        continue;  // outside the box: rejected without evaluation
      }
      proposals.push_back(std::move(p));
      owners.push_back(i);
    }
    const auto fp = objective.evaluate(proposals);
    for (std::size_t k = 0; k < owners.size(); ++k) {
      const std::size_t i = owners[k];
      auto &s = states[i];
      auto &r = records[i];
      ++r.evaluations;
      const double a = mh_acceptance_probability(s.f, fp[k], temperature);
      const double u = s.uniform(s.rng);
      if (u < a) {
        if (fp[k] > s.f) ++r.uphill_acceptances;
        ++r.acceptance_count;
        s.z = std::move(proposals[k]);
        s.f = fp[k];
        if (s.f < r.best_score) {
          r.best_score = s.f;
          r.best_z = s.z;
          r.best_step = step;
        }
      }
    }
    if (config.keep_trace) {
      for (std::size_t i = 0; i < n; ++i) {
        records[i].trace.push_back(states[i].z);
        records[i].best_so_far.push_back(records[i].best_score);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    records[i].final_z = states[i].z;
    records[i].final_score = states[i].f;
  }
  return records;
}

}  // namespace

ChainRecord run_chain(const Objective &objective, const SamplerConfig &config, std::uint64_t seed,
                      int chain_index) {
  config.validate();
  const std::uint64_t seeds[1] = {seed};
  const int indices[1] = {chain_index};
  return run_lockstep(objective, config, seeds, indices).front();
}

SearchResult run_search(const Objective &objective, const SamplerConfig &config) {
  config.validate();
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(config.n_chains));
  std::vector<int> indices(seeds.size());
  for (int i = 0; i < config.n_chains; ++i) {
    seeds[static_cast<std::size_t>(i)] = chain_seed(config.seed, i);
    indices[static_cast<std::size_t>(i)] = i;
  }
  SearchResult result;
  result.chains = run_lockstep(objective, config, seeds, indices);
  for (std::size_t i = 1; i < result.chains.size(); ++i) {
    if (result.chains[i].best_score < result.chains[static_cast<std::size_t>(result.best_chain)].best_score) {
      result.best_chain = static_cast<int>(i);
    }
  }
  const auto &best = result.chains[static_cast<std::size_t>(result.best_chain)];
  result.best_z = best.best_z;
  result.best_score = best.best_score;
  result.best_sample = objective.materialize(result.best_z);
  return result;
}

std::vector<LatentCode> post_burn_in_states(std::span<const ChainRecord> chains, int burn_in) {
  std::vector<LatentCode> out;
  for (const auto &c : chains) {
    for (std::size_t t = static_cast<std::size_t>(burn_in) + 1; t < c.trace.size(); ++t) {
      out.push_back(c.trace[t]);
    }
  }
  return out;
}

long evaluation_budget(const SamplerConfig &config) {
  return static_cast<long>(config.n_chains) * static_cast<long>(config.n_steps);
}

DescentResult coordinate_descent_baseline(const Objective &objective, const CoordinateDescentConfig &config) {
  const LatentDomain &domain = objective.domain();
  if (domain.kind() != DomainKind::kBox) throw InvalidArgument("coordinate descent needs a box domain");
  if (!(config.initial_step > 0.0) || !(config.min_step > 0.0)) {
    throw InvalidArgument("coordinate descent steps must be positive");
  }
  Rng rng(config.seed);
  DescentResult r;
  r.best_z = sample_uniform(domain, rng);
  r.best_score = objective.evaluate(std::span<const LatentCode>(&r.best_z, 1))[0];

  double step = config.initial_step;
  const auto dim = static_cast<std::size_t>(domain.dim());
  while (step >= config.min_step) {
    bool improved = false;
    for (std::size_t i = 0; i < dim; ++i) {
      std::vector<LatentCode> candidates;
      for (const double sign : {1.0, -1.0}) {
        LatentCode c = r.best_z;
        c.coords[i] += sign * step;
        if (domain.contains(c.coords)) candidates.push_back(std::move(c));
      }
      const long remaining = config.max_evaluations - r.evaluations;
      if (remaining <= 0) return r;
      if (static_cast<long>(candidates.size()) > remaining) candidates.resize(static_cast<std::size_t>(remaining));
      if (candidates.empty()) continue;
      const auto f = objective.evaluate(candidates);
      r.evaluations += static_cast<long>(candidates.size());
      std::size_t arg = 0;
      for (std::size_t k = 1; k < f.size(); ++k) {
        if (f[k] < f[arg]) arg = k;
      }
      if (f[arg] < r.best_score) {
        r.best_score = f[arg];
        r.best_z = std::move(candidates[arg]);
        improved = true;
      }
    }
    if (!improved) step /= 2.0;
  }
  r.converged = true;
  return r;
}

std::vector<InstanceResult> run_instance_conditional_suite(const Detector &detector, const Dataset &bases,
                                                           InstanceModel model_kind,
                                                           const SamplerConfig &config,
                                                           std::size_t max_instances, double temperature) {
  config.validate();
  const std::size_t n = std::min(bases.size(), max_instances);
  if (n == 0) throw InvalidArgument("instance-conditional suite needs at least one base sample");
  std::vector<InstanceResult> results(n);
  parallel_for(n, [&](std::size_t idx) {
    const ImageSample &base = bases[idx];
    std::unique_ptr<VariationModel> model =
        model_kind == InstanceModel::kAffine ? make_affine_model(base) : make_color_model(base);
    AdversarialDistribution dist(detector, *model, temperature);

    InstanceResult &out = results[idx];
    out.index = idx;
    out.clean_score = detector.score(base);
    const LatentCode identity = *model->identity_code();
    out.identity_score = dist.evaluate(std::span<const LatentCode>(&identity, 1))[0];

    SamplerConfig instance_config = config;
    instance_config.seed = derive_seed(config.seed, idx);
    SearchResult search = run_search(dist, instance_config);
    if (out.identity_score <= search.best_score) {
      out.worst_z = identity;
      out.worst_score = out.identity_score;
      out.identity_was_best = true;
    } else {
      out.worst_z = search.best_z;
      out.worst_score = search.best_score;
    }
    out.worst_sample = model->generate(out.worst_z);
    out.chains = std::move(search.chains);
  });
  logger().debug("instance-conditional suite: {} instances searched", n);
  return results;
}

}  // namespace evg
