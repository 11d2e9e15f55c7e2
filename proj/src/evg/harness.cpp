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
#include "evg/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <system_error>

#include <fmt/format.h>

#include "evg/log.hpp"
#include "evg/parallel.hpp"
#include "evg/rng.hpp"

namespace evg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

void check_keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("config '{}': expected an object", where));
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &[key, value] : obj.items()) {
    if (!ok.count(key)) {
      throw ConfigError(fmt::format("config '{}': unknown key '{}'", where, key));
    }
  }
}

const json &require(const json &obj, const std::string &where, const char *key) {
  if (!obj.contains(key)) throw ConfigError(fmt::format("config '{}': missing key '{}'", where, key));
  return obj.at(key);
}

std::string key_path(const std::string &where, const char *key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

long long get_int(const json &obj, const std::string &where, const char *key, std::optional<long long> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    require(obj, where, key);
  }
  const auto &v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(fmt::format("config '{}': expected an integer", key_path(where, key)));
  return v.get<long long>();
}

std::uint64_t get_seed(const json &obj, const std::string &where, const char *key) {
  if (!obj.contains(key)) return 0;
  const auto &v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(fmt::format("config '{}': expected a non-negative integer", key_path(where, key)));
}

double get_double(const json &obj, const std::string &where, const char *key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto &v = obj.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("config '{}': expected a number", key_path(where, key)));
  return v.get<double>();
}

std::string get_string(const json &obj, const std::string &where, const char *key,
                       std::optional<std::string> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    require(obj, where, key);
  }
  const auto &v = obj.at(key);
  if (!v.is_string()) throw ConfigError(fmt::format("config '{}': expected a string", key_path(where, key)));
  return v.get<std::string>();
}

fs::path resolve(const fs::path &base_dir, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

DatasetFormat get_format(const json &obj, const std::string &where) {
  const auto name = get_string(obj, where, "format", "raw_tensor");
  try {
    return parse_dataset_format(name);
  } catch (const Error &) {
    throw ConfigError(fmt::format("config '{}.format': unknown dataset format '{}'", where, name));
  }
}

std::optional<int> get_channels(const json &obj, const std::string &where) {
  if (!obj.contains("channels")) return std::nullopt;
  const auto ch = get_int(obj, where, "channels");
  if (ch != 1 && ch != 3) throw ConfigError(fmt::format("config '{}.channels': must be 1 or 3", where));
  return static_cast<int>(ch);
}

DatasetSpec dataset_spec(const json &obj, const std::string &where, const char *key, const fs::path &base_dir,
                         DatasetFormat format, std::optional<int> channels) {
  DatasetSpec s;
  s.path = get_string(obj, where, key);
  s.resolved = resolve(base_dir, s.path);
  s.format = format;
  s.channels = channels;
  return s;
}

EndpointSpec parse_endpoint(const json &obj, const std::string &where, const fs::path &base_dir) {
  check_keys(obj, where, {"transport", "command", "host", "port", "pool_size", "timeout_ms"});
  EndpointSpec e;
  const auto transport = get_string(obj, where, "transport");
  if (transport == "stdio") {
    e.kind = EndpointSpec::Kind::kStdio;
    const auto &cmd = require(obj, where, "command");
    if (!cmd.is_array() || cmd.empty()) {
      throw ConfigError(fmt::format("config '{}.command': expected a non-empty array of strings", where));
    }
    for (const auto &a : cmd) {
      if (!a.is_string()) throw ConfigError(fmt::format("config '{}.command': expected strings", where));
      e.command.push_back(a.get<std::string>());
    }
    const fs::path prog(e.command.front());
    if (prog.is_relative() && e.command.front().find('/') != std::string::npos) {
      e.command.front() = (base_dir / prog).string();
    }
    if (obj.contains("host") || obj.contains("port")) {
      throw ConfigError(fmt::format("config '{}': host/port only apply to the tcp transport", where));
    }
  } else if (transport == "tcp") {
    e.kind = EndpointSpec::Kind::kTcp;
    e.host = get_string(obj, where, "host", "127.0.0.1");
    const auto port = get_int(obj, where, "port");
    if (port < 1 || port > 65535) throw ConfigError(fmt::format("config '{}.port': out of range", where));
    e.port = static_cast<int>(port);
    if (obj.contains("command")) throw ConfigError(fmt::format("config '{}': command only applies to stdio", where));
  } else {
    throw ConfigError(fmt::format("config '{}.transport': expected \"stdio\" or \"tcp\"", where));
  }
  const auto pool = get_int(obj, where, "pool_size", 1);
  if (pool < 1 || pool > 256) throw ConfigError(fmt::format("config '{}.pool_size': must be in [1, 256]", where));
  e.pool_size = static_cast<int>(pool);
  const auto timeout = get_int(obj, where, "timeout_ms", kDefaultTimeout.count());
  if (timeout < 1) throw ConfigError(fmt::format("config '{}.timeout_ms': must be positive", where));
  e.timeout = std::chrono::milliseconds(timeout);
  return e;
}

DetectorSpec parse_detector(const json &obj, const std::string &where, const fs::path &base_dir) {
  DetectorSpec d;
  const auto type = get_string(obj, where, "type");
  if (type == "mahalanobis") {
    check_keys(obj, where, {"type"});
    d.kind = DetectorSpec::Kind::kMahalanobis;
  } else if (type == "knn") {
    check_keys(obj, where, {"type", "k"});
    d.kind = DetectorSpec::Kind::kKnn;
    const auto k = get_int(obj, where, "k", 5);
    if (k < 1) throw ConfigError(fmt::format("config '{}.k': must be >= 1", where));
    d.k = static_cast<int>(k);
  } else if (type == "kernel_energy") {
    check_keys(obj, where, {"type", "bandwidth"});
    d.kind = DetectorSpec::Kind::kKernelEnergy;
    d.bandwidth = get_double(obj, where, "bandwidth", 0.0);
  } else if (type == "external") {
    check_keys(obj, where, {"type", "endpoint"});
    d.kind = DetectorSpec::Kind::kExternal;
    d.endpoint = parse_endpoint(require(obj, where, "endpoint"), where + ".endpoint", base_dir);
  } else {
    throw ConfigError(fmt::format("config '{}.type': unknown detector '{}'", where, type));
  }
  return d;
}

AttackConfig parse_attack(const json &obj, const std::string &where) {
  check_keys(obj, where, {"epsilon", "n_steps", "momentum", "step_size", "halving_period", "fd_delta"});
  AttackConfig a;
  a.epsilon = get_double(obj, where, "epsilon", a.epsilon);
  a.n_steps = static_cast<int>(get_int(obj, where, "n_steps", a.n_steps));
  a.momentum = get_double(obj, where, "momentum", a.momentum);
  a.step_size = get_double(obj, where, "step_size", a.step_size);
  a.halving_period = static_cast<int>(get_int(obj, where, "halving_period", a.halving_period));
  a.fd_delta = get_double(obj, where, "fd_delta", a.fd_delta);
  try {
    a.validate();
  } catch (const Error &e) {
    throw ConfigError(fmt::format("config '{}': {}", where, e.what()));
  }
  return a;
}

VariationSpec parse_variation(const json &obj, const std::string &where, const fs::path &base_dir) {
  VariationSpec v;
  const auto type = get_string(obj, where, "type");
  auto instances = [&] {
    const auto n = get_int(obj, where, "max_instances", 0);
    if (n < 0) throw ConfigError(fmt::format("config '{}.max_instances': must be >= 0", where));
    v.max_instances = static_cast<std::size_t>(n);
  };
  auto temperature = [&] {
    v.temperature = get_double(obj, where, "temperature", 1.0);
    if (!(v.temperature > 0.0) || !std::isfinite(v.temperature)) {
      throw ConfigError(fmt::format("config '{}.temperature': must be positive", where));
    }
  };
  if (type == "affine" || type == "color") {
    check_keys(obj, where, {"type", "max_instances", "temperature"});
    v.kind = type == "affine" ? VariationSpec::Kind::kAffine : VariationSpec::Kind::kColor;
    instances();
    temperature();
  } else if (type == "external") {
    check_keys(obj, where, {"type", "endpoint", "domain", "temperature"});
    v.kind = VariationSpec::Kind::kExternal;
    v.endpoint = parse_endpoint(require(obj, where, "endpoint"), where + ".endpoint", base_dir);
    const auto domain = get_string(obj, where, "domain", "sphere");
    if (domain == "sphere") {
      v.domain = DomainKind::kUnitSphere;
    } else if (domain == "box") {
      v.domain = DomainKind::kBox;
    } else {
      throw ConfigError(fmt::format("config '{}.domain': expected \"sphere\" or \"box\"", where));
    }
    temperature();
  } else if (type == "linf") {
    check_keys(obj, where, {"type", "max_instances", "attack"});
    v.kind = VariationSpec::Kind::kLinf;
    instances();
    v.attack = parse_attack(obj.contains("attack") ? obj.at("attack") : json::object(), where + ".attack");
  } else {
    throw ConfigError(fmt::format("config '{}.type': unknown variation '{}'", where, type));
  }
  return v;
}

SamplerConfig parse_sampler(const json &obj, const std::string &where) {
  check_keys(obj, where, {"preset", "n_chains", "n_steps", "proposal_std"});
  SamplerConfig s;
  if (obj.contains("preset")) {
    const auto preset = get_string(obj, where, "preset");
    if (preset == "full") {
      s = SamplerConfig::full_preset(0);
    } else if (preset == "table") {
      s = SamplerConfig::table_preset(0);
    } else {
      throw ConfigError(fmt::format("config '{}.preset': expected \"full\" or \"table\"", where));
    }
  }
  s.n_chains = static_cast<int>(get_int(obj, where, "n_chains", s.n_chains));
  s.n_steps = static_cast<int>(get_int(obj, where, "n_steps", s.n_steps));
  s.proposal_std = get_double(obj, where, "proposal_std", s.proposal_std);
  try {
    s.validate();
  } catch (const Error &e) {
    throw ConfigError(fmt::format("config '{}': {}", where, e.what()));
  }
  return s;
}

void check_exists(const fs::path &p) {
  std::error_code ec;
  if (!fs::exists(p, ec)) throw ConfigError(fmt::format("missing path: {}", p.string()));
}

}  // namespace

std::string DetectorSpec::id() const {
  switch (kind) {
    case Kind::kMahalanobis: return "mahalanobis";
    case Kind::kKnn: return fmt::format("knn(k={})", k);
    case Kind::kKernelEnergy:
      return bandwidth > 0.0 ? fmt::format("kernel_energy(bandwidth={})", format_sig9(bandwidth))
                             : "kernel_energy(bandwidth=median)";
    case Kind::kExternal: return fmt::format("external({})", endpoint.describe());
  }
  return "unknown";
}

std::string VariationSpec::id() const {
  switch (kind) {
    case Kind::kAffine: return "affine";
    case Kind::kColor: return "color";
    case Kind::kExternal:
      return fmt::format("external({},{})", endpoint.describe(), domain == DomainKind::kUnitSphere ? "sphere" : "box");
    case Kind::kLinf: return fmt::format("linf(epsilon={})", format_sig9(attack.epsilon));
  }
  return "unknown";
}

RunConfig parse_run_config(const json &j, const fs::path &base_dir, ConfigMode mode, bool check_paths) {
  const bool transfer = mode == ConfigMode::kTransfer;
  if (transfer) {
    check_keys(j, "", {"schema_version", "in_dataset", "out_dataset", "detectors", "variation", "sampler", "seed",
                       "n_repeats", "output_dir", "grid_columns", "grid_max"});
  } else {
    check_keys(j, "", {"schema_version", "in_dataset", "out_dataset", "detector", "variation", "sampler", "seed",
                       "n_repeats", "output_dir", "grid_columns", "grid_max"});
  }
  const auto version = get_int(j, "", "schema_version");
  if (version != kConfigSchemaVersion) {
    throw ConfigError(fmt::format("config 'schema_version': unsupported version {}", version));
  }
  RunConfig c;
  c.raw = j;

  const auto &in = require(j, "", "in_dataset");
  check_keys(in, "in_dataset", {"format", "channels", "train", "valid", "test"});
  const auto in_format = get_format(in, "in_dataset");
  const auto in_channels = get_channels(in, "in_dataset");
  c.train = dataset_spec(in, "in_dataset", "train", base_dir, in_format, in_channels);
  c.valid = dataset_spec(in, "in_dataset", "valid", base_dir, in_format, in_channels);
  c.test = dataset_spec(in, "in_dataset", "test", base_dir, in_format, in_channels);

  const auto &out = require(j, "", "out_dataset");
  check_keys(out, "out_dataset", {"format", "channels", "path"});
  c.out = dataset_spec(out, "out_dataset", "path", base_dir, get_format(out, "out_dataset"),
                       get_channels(out, "out_dataset"));

  if (transfer) {
    const auto &dets = require(j, "", "detectors");
    if (!dets.is_array() || dets.empty()) throw ConfigError("config 'detectors': expected a non-empty array");
    for (std::size_t i = 0; i < dets.size(); ++i) {
      c.detectors.push_back(parse_detector(dets[i], fmt::format("detectors[{}]", i), base_dir));
    }
  } else {
    c.detectors.push_back(parse_detector(require(j, "", "detector"), "detector", base_dir));
  }
  c.variation = parse_variation(require(j, "", "variation"), "variation", base_dir);
  c.sampler = parse_sampler(j.contains("sampler") ? j.at("sampler") : json::object(), "sampler");
  c.seed = get_seed(j, "", "seed");
  c.sampler.seed = c.seed;
  const auto repeats = get_int(j, "", "n_repeats", 1);
  if (repeats < 1) throw ConfigError("config 'n_repeats': must be >= 1");
  c.n_repeats = static_cast<int>(repeats);
  c.output_dir = get_string(j, "", "output_dir");
  c.resolved_output_dir = resolve(base_dir, c.output_dir);
  const auto columns = get_int(j, "", "grid_columns", 8);
  if (columns < 1) throw ConfigError("config 'grid_columns': must be >= 1");
  c.grid_columns = static_cast<int>(columns);
  const auto grid_max = get_int(j, "", "grid_max", 64);
  if (grid_max < 1) throw ConfigError("config 'grid_max': must be >= 1");
  c.grid_max = static_cast<std::size_t>(grid_max);

  if (check_paths) {
    for (const auto *d : {&c.train, &c.valid, &c.test, &c.out}) check_exists(d->resolved);
  }
  return c;
}

RunConfig load_run_config(const fs::path &path, ConfigMode mode) {
  check_exists(path);
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  json j;
  try {
    f >> j;
  } catch (const json::exception &e) {
    throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return parse_run_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."), mode);
}

// ---------------------------------------------------------------------------
// Runs

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(bool frozen) : frozen_(frozen), start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return frozen_ ? 0.0 : s;
  }

 private:
  bool frozen_;
  std::chrono::steady_clock::time_point start_;
};

Dataset load(const DatasetSpec &spec, Split split) {
  LoadOptions o;
  o.split = split;
  o.channels = spec.channels;
  return load_dataset(spec.resolved, spec.format, o);
}

struct Data {
  Dataset train, valid, test, out;
};

Data load_all(const RunConfig &c) {
  Data d{load(c.train, Split::kTrain), load(c.valid, Split::kValid), load(c.test, Split::kTest),
         load(c.out, Split::kTest)};
  const Shape s = d.test.shape();
  for (const auto *ds : {&d.train, &d.valid, &d.out}) {
    if (!(ds->shape() == s)) {
      throw ConfigError(fmt::format("dataset shapes differ: {} vs in_dataset.test {}", ds->shape().to_string(),
                                    s.to_string()));
    }
  }
  return d;
}

Detector build_detector(const DetectorSpec &spec, const Data &data) {
  Detector raw = [&] {
    switch (spec.kind) {
      case DetectorSpec::Kind::kMahalanobis: return fit_mahalanobis(data.train);
      case DetectorSpec::Kind::kKnn: return fit_knn(data.train, spec.k);
      case DetectorSpec::Kind::kKernelEnergy: return fit_kernel_energy(data.train, spec.bandwidth);
      case DetectorSpec::Kind::kExternal: return connect_external_detector(spec.endpoint);
    }
    throw ConfigError("unknown detector kind");
  }();
  if (const auto shape = raw.input_shape(); shape && !(*shape == data.test.shape())) {
    throw ConfigError(fmt::format("detector {} expects input {} but the datasets are {}", spec.id(),
                                  shape->to_string(), data.test.shape().to_string()));
  }
  return calibrate(raw, data.valid);
}

std::unique_ptr<ExternalGeneratorModel> build_generator(const VariationSpec &v, const Shape &shape) {
  if (v.kind != VariationSpec::Kind::kExternal) return nullptr;
  auto g = connect_external_generator(v.endpoint, v.domain);
  if (!(g->output_shape() == shape)) {
    throw ConfigError(fmt::format("generator {} produces {} but the datasets are {}", v.endpoint.describe(),
                                  g->output_shape().to_string(), shape.to_string()));
  }
  return g;
}

std::string utc_stamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

void make_dirs(const fs::path &p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", p.string(), ec.message()));
}

fs::path make_run_dir(const fs::path &output_dir, bool fixed_clock) {
  make_dirs(output_dir);
  if (fixed_clock) {
    const fs::path p = output_dir / "fixed";
    make_dirs(p);
    return p;
  }
  const std::string stamp = utc_stamp();
  fs::path p = output_dir / stamp;
  for (int n = 2; fs::exists(p); ++n) p = output_dir / fmt::format("{}-{}", stamp, n);
  make_dirs(p);
  return p;
}

std::vector<ImageSample> first_n(const std::vector<ImageSample> &v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size()))};
}

}  // namespace

AttackOutcome run_attack(const Detector &detector, const Dataset &out, const VariationSpec &variation,
                         const SamplerConfig &sampler, std::uint64_t repeat_seed, ExternalGeneratorModel *generator) {
  AttackOutcome r;
  const std::size_t n_instances =
      variation.max_instances == 0 ? out.size() : std::min(variation.max_instances, out.size());
  std::vector<double> clean, adv;

  switch (variation.kind) {
    case VariationSpec::Kind::kAffine:
    case VariationSpec::Kind::kColor: {
      SamplerConfig sc = sampler;
      sc.seed = repeat_seed;
      const auto kind = variation.kind == VariationSpec::Kind::kAffine ? InstanceModel::kAffine : InstanceModel::kColor;
      auto results = run_instance_conditional_suite(detector, out, kind, sc, n_instances, variation.temperature);
      for (auto &res : results) {
        r.clean_samples.push_back(out[res.index]);
        clean.push_back(res.clean_score);
        r.adversarial_samples.push_back(std::move(res.worst_sample));
        adv.push_back(res.worst_score);
        for (const auto &ch : res.chains) {
          r.chains.push_back({res.index, ch.chain_index, ch.best_score, ch.best_step, ch.acceptance_count,
                              ch.evaluations});
        }
      }
      break;
    }
    case VariationSpec::Kind::kLinf: {
      std::vector<AttackResult> results(n_instances);
      parallel_for(n_instances, [&](std::size_t i) {
        AttackConfig ac = variation.attack;
        ac.seed = derive_seed(repeat_seed, i);
        results[i] = linf_attack(detector, out[i], ac);
      });
      for (std::size_t i = 0; i < n_instances; ++i) {
        r.clean_samples.push_back(out[i]);
        clean.push_back(results[i].f_base);
        r.adversarial_samples.push_back(std::move(results[i].x_adv));
        adv.push_back(results[i].f_adv);
        r.chains.push_back({i, 0, results[i].f_adv, results[i].best_step, 0, static_cast<int>(results[i].evaluations)});
      }
      break;
    }
    case VariationSpec::Kind::kExternal: {
      if (!generator) throw InvalidArgument("external variation needs a connected generator");
      const long clamps_before = generator->clamp_warnings();
      SamplerConfig sc = sampler;
      sc.seed = repeat_seed;
      const AdversarialDistribution target(detector, *generator, variation.temperature);
      const auto search = run_search(target, sc);
      std::vector<LatentCode> best;
      for (const auto &ch : search.chains) {
        best.push_back(ch.best_z);
        adv.push_back(ch.best_score);
        r.chains.push_back({std::nullopt, ch.chain_index, ch.best_score, ch.best_step, ch.acceptance_count,
                            ch.evaluations});
      }
      r.adversarial_samples = generator->generate_batch(best);
      r.clean_samples.assign(out.samples().begin(), out.samples().end());
      const auto s = detector.score_batch(out.samples());
      clean.assign(s.values().begin(), s.values().end());
      r.clamp_warnings = generator->clamp_warnings() - clamps_before;
      break;
    }
  }
  r.clean_scores = ScoreVector(std::move(clean));
  r.adversarial_scores = ScoreVector(std::move(adv));
  return r;
}

json mean_stderr(const std::vector<double> &values) {
  if (values.empty()) throw InvalidArgument("mean_stderr of an empty list");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double se = 0.0;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return json{{"mean", mean}, {"stderr", se}, {"n", values.size()}, {"values", values}};
}

EvaluateOutcome run_evaluate(const RunConfig &config, const RunOptions &options) {
  const ThreadLimit limit(options.threads);
  Stopwatch total(options.fixed_clock), watch(options.fixed_clock);
  auto &log = logger();

  const Data data = load_all(config);
  const auto &spec = config.detectors.front();
  const Detector detector = build_detector(spec, data);
  auto generator = build_generator(config.variation, data.test.shape());
  const ScoreVector in_scores = detector.score_batch(data.test.samples());
  const double fit_time = watch.lap();
  log.info("detector {} ready; {} in-test scores", spec.id(), in_scores.size());

  EvaluateOutcome outcome;
  outcome.run_dir = make_run_dir(config.resolved_output_dir, options.fixed_clock);
  write_text_file(outcome.run_dir / "config.json", dump_stable(config.raw));
  const std::string hash = fnv1a_hex(config.raw.dump());

  std::vector<double> clean_aucs, adv_aucs, minranks;
  json runs = json::array();
  for (int k = 0; k < config.n_repeats; ++k) {
    const std::uint64_t repeat_seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
    log.info("repeat {}/{} (seed {})", k + 1, config.n_repeats, repeat_seed);
    watch.lap();
    auto attack = run_attack(detector, data.out, config.variation, config.sampler, repeat_seed, generator.get());
    const double search_time = watch.lap();

    EvaluationReport rep;
    rep.config = config.raw;
    rep.config_hash = hash;
    rep.master_seed = config.seed;
    rep.repeat_index = k;
    rep.repeat_seed = repeat_seed;
    rep.detector_id = spec.id();
    rep.variation_id = config.variation.id();
    rep.in_dataset_id = config.test.path;
    rep.out_dataset_id = config.out.path;
    rep.clean_auc = auc(in_scores, attack.clean_scores);
    rep.adversarial_auc = auc(in_scores, attack.adversarial_scores);
    rep.minrank = minrank(in_scores, attack.adversarial_scores);
    rep.n_in_test = in_scores.size();
    rep.n_adversarial = attack.adversarial_scores.size();
    rep.clamp_warnings = attack.clamp_warnings;
    rep.chains = std::move(attack.chains);
    rep.in_scores = in_scores;
    rep.clean_scores = attack.clean_scores;
    rep.adversarial_scores = attack.adversarial_scores;

    const std::string sub = fmt::format("repeat_{}", k);
    const fs::path dir = outcome.run_dir / sub;
    make_dirs(dir);
    save_sample_grid(first_n(attack.adversarial_samples, config.grid_max), config.grid_columns, dir / "worst_cases.png");
    save_sample_grid(first_n(attack.clean_samples, config.grid_max), config.grid_columns, dir / "clean.png");
    rep.grid_paths = {"worst_cases.png", "clean.png"};
    rep.timings = {{"fit_s", fit_time}, {"search_s", search_time}};
    write_report(rep, dir / "report.json");
    write_report_exports(rep, dir);
    log.info("repeat {}: clean_auc {:.4f} adversarial_auc {:.4f} minrank {}", k, rep.clean_auc, rep.adversarial_auc,
             rep.minrank);

    clean_aucs.push_back(rep.clean_auc);
    adv_aucs.push_back(rep.adversarial_auc);
    minranks.push_back(static_cast<double>(rep.minrank));
    runs.push_back(sub + "/report.json");
    outcome.reports.push_back(std::move(rep));
  }

  outcome.aggregate = json{
      {"schema_version", kReportSchemaVersion},
      {"config_hash", hash},
      {"n_repeats", config.n_repeats},
      {"clean_auc", mean_stderr(clean_aucs)},
      {"adversarial_auc", mean_stderr(adv_aucs)},
      {"minrank", mean_stderr(minranks)},
      {"runs", runs},
      {"timings", {{"total_s", total.lap()}}},
  };
  write_text_file(outcome.run_dir / "aggregate.json", dump_stable(outcome.aggregate));
  return outcome;
}

TransferOutcome run_transfer(const RunConfig &config, const RunOptions &options) {
  const ThreadLimit limit(options.threads);
  auto &log = logger();
  const Data data = load_all(config);

  std::vector<Detector> detectors;
  for (const auto &spec : config.detectors) detectors.push_back(build_detector(spec, data));
  auto generator = build_generator(config.variation, data.test.shape());

  TransferOutcome outcome;
  outcome.run_dir = make_run_dir(config.resolved_output_dir, options.fixed_clock);
  write_text_file(outcome.run_dir / "config.json", dump_stable(config.raw));

  std::map<std::string, int> seen;
  for (const auto &spec : config.detectors) {
    const auto id = spec.id();
    const int n = seen[id]++;
    outcome.names.push_back(n == 0 ? id : fmt::format("{}#{}", id, n));
  }

  const std::uint64_t repeat_seed = derive_seed(config.seed, 0);
  std::vector<std::vector<ImageSample>> sets;
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    log.info("searching against {} ({}/{})", outcome.names[i], i + 1, detectors.size());
    auto attack = run_attack(detectors[i], data.out, config.variation, config.sampler, repeat_seed, generator.get());
    save_sample_grid(first_n(attack.adversarial_samples, config.grid_max), config.grid_columns,
                     outcome.run_dir / fmt::format("worst_cases_{}.png", i));
    sets.push_back(std::move(attack.adversarial_samples));
  }
  outcome.matrix = transfer_matrix(detectors, sets, data.test);
  write_transfer_matrix(outcome.matrix, outcome.names, outcome.run_dir / "transfer_matrix.csv");
  const json summary = {
      {"schema_version", kReportSchemaVersion},
      {"config_hash", fnv1a_hex(config.raw.dump())},
      {"seeds", {{"master", config.seed}, {"repeat", repeat_seed}}},
      {"detectors", outcome.names},
      {"variation", config.variation.id()},
      {"matrix", outcome.matrix},
  };
  write_text_file(outcome.run_dir / "transfer.json", dump_stable(summary));
  return outcome;
}

int exit_code_for(ErrorCode code) { return code == ErrorCode::kConfig ? 2 : 1; }

}  // namespace evg
