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
#ifndef EVG_REMOTE_HPP_
#define EVG_REMOTE_HPP_

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "evg/detectors.hpp"
#include "evg/protocol.hpp"
#include "evg/transport.hpp"
#include "evg/variation.hpp"

namespace evg {

// Engine side of one adapter session: handshake on construction, then one
// in-flight request at a time. Any protocol violation closes the connection.
class AdapterConnection {
 public:
  explicit AdapterConnection(std::unique_ptr<Transport> transport,
                             std::chrono::milliseconds timeout = kDefaultTimeout);

  const protocol::Capabilities &capabilities() const { return caps_; }
  bool broken() const { return broken_; }

  // Raw scores, one per sample, in request order.
  std::vector<double> score(std::span<const ImageSample> batch);
  // Flattened pixels (batch * shape.size()), unclamped as received.
  std::vector<float> generate(std::span<const LatentCode> codes);

 private:
  protocol::Frame round_trip(const protocol::Frame &request, protocol::MsgType expected);

  std::unique_ptr<Transport> transport_;
  std::chrono::milliseconds timeout_;
  protocol::Capabilities caps_;
  bool broken_ = false;
};

struct EndpointSpec {
  enum class Kind { kStdio, kTcp };
  Kind kind = Kind::kStdio;
  std::vector<std::string> command;  // stdio: argv of the adapter process
  std::string host = "127.0.0.1";    // tcp
  int port = 0;                      // tcp
  int pool_size = 1;
  std::chrono::milliseconds timeout = kDefaultTimeout;

  std::string describe() const;
};

// N connections to one adapter. All must report identical capabilities.
class AdapterPool {
 public:
  explicit AdapterPool(const EndpointSpec &spec);
  AdapterPool(std::vector<std::unique_ptr<AdapterConnection>> connections, std::string description);

  const protocol::Capabilities &capabilities() const { return connections_.front()->capabilities(); }
  std::size_t size() const { return connections_.size(); }
  const std::string &description() const { return description_; }

  // Runs fn on connection `index` while holding its lock.
  template <class Fn>
  auto with_connection(std::size_t index, Fn &&fn) {
    std::lock_guard<std::mutex> lock(*locks_[index]);
    return fn(*connections_[index]);
  }

 private:
  std::vector<std::unique_ptr<AdapterConnection>> connections_;
  std::vector<std::unique_ptr<std::mutex>> locks_;
  std::string description_;
};

// Splits each batch over the pool; order of scores matches the input.
class ExternalDetectorModel final : public ScoreModel {
 public:
  explicit ExternalDetectorModel(std::shared_ptr<AdapterPool> pool);

  DetectorKind kind() const override { return DetectorKind::kExternal; }
  std::string name() const override { return "external"; }
  std::optional<Shape> input_shape() const override { return pool_->capabilities().shape; }
  std::vector<double> raw_batch(std::span<const ImageSample> samples) const override;

 private:
  std::shared_ptr<AdapterPool> pool_;
};

// Unconditional variation model served by a generator adapter. Pixels outside
// [0,1] are clamped and counted.
class ExternalGeneratorModel final : public VariationModel {
 public:
  ExternalGeneratorModel(std::shared_ptr<AdapterPool> pool, DomainKind domain_kind);

  ModelKind kind() const override { return ModelKind::kExternal; }
  std::string name() const override { return "external"; }
  const LatentDomain &domain() const override { return domain_; }
  Shape output_shape() const override { return pool_->capabilities().shape; }
  std::vector<ImageSample> generate_batch(std::span<const LatentCode> codes) const override;

  long clamp_warnings() const { return clamp_warnings_.load(); }

 protected:
  ImageSample generate_unchecked(const LatentCode &z) const override;

 private:
  std::shared_ptr<AdapterPool> pool_;
  LatentDomain domain_;
  mutable std::atomic<long> clamp_warnings_{0};
};

Detector connect_external_detector(const EndpointSpec &spec);
std::unique_ptr<ExternalGeneratorModel> connect_external_generator(const EndpointSpec &spec,
                                                                   DomainKind domain_kind = DomainKind::kUnitSphere);

// Adapter side: answers HELLO, then requests until EOF. Handler exceptions,
// unknown message types and malformed request payloads become ERROR frames
// and the session continues. Corrupt framing (bad magic, truncation) throws.
struct AdapterHandlers {
  protocol::Capabilities capabilities;
  std::function<std::vector<double>(std::span<const ImageSample>)> score;
  // Rows of latent_dim floats in; batch * shape.size() pixels out.
  std::function<std::vector<float>(std::uint32_t batch, std::span<const float> latents)> generate;
};

void serve_adapter(Transport &transport, const AdapterHandlers &handlers);

}  // namespace evg

#endif  // EVG_REMOTE_HPP_
