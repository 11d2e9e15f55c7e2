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
#ifndef EVG_SAMPLER_HPP_
#define EVG_SAMPLER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evg/detectors.hpp"
#include "evg/landscape.hpp"
#include "evg/variation.hpp"

namespace evg {

// Energy E(z) over the normalized latent codes of a domain, paired with the
// temperature of the Gibbs target p(z) ~ exp(-E(z)/T). The normalizing
// constant is never needed.
class Objective {
 public:
  explicit Objective(double temperature);
  virtual ~Objective() = default;

  double temperature() const { return temperature_; }
  virtual const LatentDomain &domain() const = 0;
  // One energy per code, order-preserving. Codes are in-domain.
  virtual std::vector<double> evaluate(std::span<const LatentCode> codes) const = 0;
  // The data-space point behind a code, when there is one.
  virtual std::optional<ImageSample> materialize(const LatentCode &) const { return std::nullopt; }

 private:
  double temperature_;
};

// E(z) = standardized detector score of g(z).
class AdversarialDistribution final : public Objective {
 public:
  AdversarialDistribution(const Detector &detector, const VariationModel &model,
                          double temperature = 1.0);

  const LatentDomain &domain() const override { return model_.domain(); }
  std::vector<double> evaluate(std::span<const LatentCode> codes) const override;
  std::optional<ImageSample> materialize(const LatentCode &z) const override;

  const Detector &detector() const { return detector_; }
  const VariationModel &model() const { return model_; }

 private:
  const Detector &detector_;
  const VariationModel &model_;
};

// A landscape evaluated on the physical coordinates of a box domain.
class LandscapeObjective final : public Objective {
 public:
  LandscapeObjective(Landscape landscape, LatentDomain domain, double temperature = 1.0);

  const LatentDomain &domain() const override { return domain_; }
  std::vector<double> evaluate(std::span<const LatentCode> codes) const override;

 private:
  Landscape landscape_;
  LatentDomain domain_;
};

struct SamplerConfig {
  int n_chains = 1;
  int n_steps = 2000;
  double proposal_std = 0.1;  // normalized latent units
  std::uint64_t seed = 0;
  bool keep_trace = false;

  // 5,000 chains x 2,000 steps, and the 1,000-chain variant.
  static SamplerConfig full_preset(std::uint64_t seed);
  static SamplerConfig table_preset(std::uint64_t seed);

  void validate() const;
};

struct ChainRecord {
  int chain_index = 0;
  std::uint64_t seed = 0;
  LatentCode best_z;
  double best_score = 0.0;
  int best_step = 0;
  int acceptance_count = 0;
  int uphill_acceptances = 0;
  int evaluations = 0;
  LatentCode final_z;
  double final_score = 0.0;
  // States after each step 0..n_steps when keep_trace is set.
  std::vector<LatentCode> trace;
  std::vector<double> best_so_far;

  bool operator==(const ChainRecord &) const = default;
};

struct SearchResult {
  std::vector<ChainRecord> chains;
  int best_chain = 0;
  LatentCode best_z;
  double best_score = 0.0;
  std::optional<ImageSample> best_sample;
};

// min{1, exp((f_current - f_proposed)/T)}.
double mh_acceptance_probability(double f_current, double f_proposed, double temperature);

std::uint64_t chain_seed(std::uint64_t master_seed, int chain_index);

// Single chain; config.n_chains is ignored.
ChainRecord run_chain(const Objective &objective, const SamplerConfig &config, std::uint64_t seed,
                      int chain_index = 0);

// Independent chains advanced in lockstep, one batched energy evaluation per
// step; chain i uses chain_seed(config.seed, i).
SearchResult run_search(const Objective &objective, const SamplerConfig &config);

// Post-burn-in states (step index > burn_in) of every traced chain.
std::vector<LatentCode> post_burn_in_states(std::span<const ChainRecord> chains, int burn_in);

struct CoordinateDescentConfig {
  double initial_step = 0.5;
  double min_step = 1e-4;
  long max_evaluations = 0;  // beyond the initial point
  std::uint64_t seed = 0;
};

struct DescentResult {
  LatentCode best_z;
  double best_score = 0.0;
  long evaluations = 0;
  bool converged = false;
};

// Evaluation budget of a search, for equal-budget comparisons.
long evaluation_budget(const SamplerConfig &config);

// Greedy cyclic coordinate descent in normalized coordinates from a uniform
// start: try +-step along each coordinate, move to the better improving
// neighbour, halve the step after a sweep without improvement.
DescentResult coordinate_descent_baseline(const Objective &objective,
                                          const CoordinateDescentConfig &config);

enum class InstanceModel { kAffine, kColor };

struct InstanceResult {
  std::size_t index = 0;
  double clean_score = 0.0;
  double identity_score = 0.0;
  LatentCode worst_z;
  ImageSample worst_sample;
  double worst_score = 0.0;
  bool identity_was_best = false;
  std::vector<ChainRecord> chains;
};

// One instance-conditional model per base sample (the first max_instances),
// each searched with seed derive_seed(config.seed, index). The identity code
// is evaluated before the chains run and competes for the worst case.
std::vector<InstanceResult> run_instance_conditional_suite(const Detector &detector,
                                                           const Dataset &bases,
                                                           InstanceModel model_kind,
                                                           const SamplerConfig &config,
                                                           std::size_t max_instances,
                                                           double temperature = 1.0);

}  // namespace evg

#endif  // EVG_SAMPLER_HPP_
