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
#include "evg/remote.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "evg/error.hpp"
#include "evg/log.hpp"
#include "evg/parallel.hpp"

namespace evg {

using protocol::Frame;
using protocol::MsgType;

AdapterConnection::AdapterConnection(std::unique_ptr<Transport> transport, std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), timeout_(timeout) {
  if (!transport_) throw InvalidArgument("adapter connection needs a transport");
  try {
    write_frame(*transport_, protocol::make_hello());
    auto reply = read_frame(*transport_, timeout_);
    if (!reply) throw ProtocolError("adapter closed the connection during handshake");
    if (reply->type == static_cast<std::uint8_t>(MsgType::kError)) {
      const auto e = protocol::parse_error(*reply);
      throw ProtocolError(fmt::format("adapter rejected handshake (code {}): {}", e.code, e.message));
    }
    caps_ = protocol::parse_hello_ack(*reply);
    if (caps_.version != protocol::kVersion) {
      throw ProtocolError(fmt::format("unsupported version {} (engine speaks {})", caps_.version, protocol::kVersion));
    }
  } catch (...) {
    broken_ = true;
    transport_->close();
    throw;
  }
  logger().debug("adapter handshake ok: role {} shape {} latent_dim {}", static_cast<int>(caps_.role),
                 caps_.shape.to_string(), caps_.latent_dim);
}

Frame AdapterConnection::round_trip(const Frame &request, MsgType expected) {
  if (broken_) throw ProtocolError("adapter connection is closed after an earlier protocol error");
  std::optional<Frame> reply;
  try {
    write_frame(*transport_, request);
    reply = read_frame(*transport_, timeout_);
    if (!reply) throw ProtocolError("adapter closed the connection");
  } catch (const ProtocolError &) {
    broken_ = true;
    transport_->close();
    throw;
  }
  if (reply->type == static_cast<std::uint8_t>(MsgType::kError)) {
    protocol::ErrorInfo e;
    try {
      e = protocol::parse_error(*reply);
    } catch (const ProtocolError &) {
      broken_ = true;
      transport_->close();
      throw;
    }
    throw RuntimeError(fmt::format("adapter error (code {}): {}", e.code, e.message));
  }
  if (reply->type != static_cast<std::uint8_t>(expected)) {
    broken_ = true;
    transport_->close();
    throw ProtocolError(fmt::format("expected {} from adapter, got {}", protocol::type_name(static_cast<std::uint8_t>(expected)),
                                    protocol::type_name(reply->type)));
  }
  return std::move(*reply);
}

std::vector<double> AdapterConnection::score(std::span<const ImageSample> batch) {
  if (caps_.role != protocol::Role::kDetector) throw InvalidArgument("adapter is not a detector");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].shape() != caps_.shape) {
      throw InvalidArgument(fmt::format("sample {} is {}, adapter expects {}", i, batch[i].shape().to_string(),
                                        caps_.shape.to_string()));
    }
  }
  const Frame reply = round_trip(protocol::make_score_request(batch), MsgType::kScoreResp);
  std::vector<double> scores;
  try {
    scores = protocol::parse_score_response(reply);
    if (scores.size() != batch.size()) {
      throw ProtocolError(fmt::format("response batch {} != request batch {}", scores.size(), batch.size()));
    }
  } catch (const ProtocolError &) {
    broken_ = true;
    transport_->close();
    throw;
  }
  return scores;
}

std::vector<float> AdapterConnection::generate(std::span<const LatentCode> codes) {
  if (caps_.role != protocol::Role::kGenerator) throw InvalidArgument("adapter is not a generator");
  for (const auto &z : codes) {
    if (z.coords.size() != caps_.latent_dim) {
      throw InvalidArgument(fmt::format("latent code has {} dims, adapter declared {}", z.coords.size(), caps_.latent_dim));
    }
  }
  const Frame reply = round_trip(protocol::make_gen_request(codes, caps_.latent_dim), MsgType::kGenResp);
  try {
    std::uint32_t batch = 0;
    auto pixels = protocol::parse_gen_response(reply, caps_.shape, batch);
    if (batch != codes.size()) {
      throw ProtocolError(fmt::format("response batch {} != request batch {}", batch, codes.size()));
    }
    return pixels;
  } catch (const ProtocolError &) {
    broken_ = true;
    transport_->close();
    throw;
  }
}

std::string EndpointSpec::describe() const {
  if (kind == Kind::kTcp) return fmt::format("tcp:{}:{}", host, port);
  return fmt::format("stdio:{}", fmt::join(command, " "));
}

AdapterPool::AdapterPool(const EndpointSpec &spec) : description_(spec.describe()) {
  if (spec.pool_size < 1) throw InvalidArgument("adapter pool size must be >= 1");
  for (int i = 0; i < spec.pool_size; ++i) {
    std::unique_ptr<Transport> t;
    if (spec.kind == EndpointSpec::Kind::kTcp) {
      t = connect_tcp(spec.host, spec.port, spec.timeout);
    } else {
      t = ChildProcessTransport::spawn(spec.command);
    }
    connections_.push_back(std::make_unique<AdapterConnection>(std::move(t), spec.timeout));
    locks_.push_back(std::make_unique<std::mutex>());
    if (!(connections_.back()->capabilities() == connections_.front()->capabilities())) {
      throw ProtocolError(fmt::format("{}: pool connections disagree on capabilities", description_));
    }
  }
}

AdapterPool::AdapterPool(std::vector<std::unique_ptr<AdapterConnection>> connections, std::string description)
    : connections_(std::move(connections)), description_(std::move(description)) {
  if (connections_.empty()) throw InvalidArgument("adapter pool needs at least one connection");
  for (std::size_t i = 0; i < connections_.size(); ++i) {
    locks_.push_back(std::make_unique<std::mutex>());
    if (!(connections_[i]->capabilities() == connections_.front()->capabilities())) {
      throw ProtocolError(fmt::format("{}: pool connections disagree on capabilities", description_));
    }
  }
}

namespace {

// Contiguous chunk boundaries: chunk c covers [bounds[c], bounds[c+1]).
std::vector<std::size_t> chunk_bounds(std::size_t n, std::size_t chunks) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  std::vector<std::size_t> b(chunks + 1);
  for (std::size_t c = 0; c <= chunks; ++c) b[c] = n * c / chunks;
  return b;
}

}  // namespace

ExternalDetectorModel::ExternalDetectorModel(std::shared_ptr<AdapterPool> pool) : pool_(std::move(pool)) {
  if (pool_->capabilities().role != protocol::Role::kDetector) {
    throw ConfigError(fmt::format("{} is not a detector adapter", pool_->description()));
  }
}

std::vector<double> ExternalDetectorModel::raw_batch(std::span<const ImageSample> samples) const {
  const auto bounds = chunk_bounds(samples.size(), pool_->size());
  std::vector<double> out(samples.size());
  parallel_for(bounds.size() - 1, [&](std::size_t c) {
    const auto part = samples.subspan(bounds[c], bounds[c + 1] - bounds[c]);
    const auto scores = pool_->with_connection(c, [&](AdapterConnection &conn) { return conn.score(part); });
    std::copy(scores.begin(), scores.end(), out.begin() + static_cast<std::ptrdiff_t>(bounds[c]));
  });
  return out;
}

namespace {

LatentDomain generator_domain(const protocol::Capabilities &caps, DomainKind kind) {
  if (caps.role != protocol::Role::kGenerator) throw ConfigError("adapter is not a generator");
  if (caps.latent_dim == 0) throw ConfigError("generator adapter declared latent_dim 0");
  const int dim = static_cast<int>(caps.latent_dim);
  if (kind == DomainKind::kUnitSphere) return LatentDomain::unit_sphere(dim);
  return LatentDomain::box(std::vector<Interval>(caps.latent_dim, Interval{-1.0, 1.0}));
}

}  // namespace

ExternalGeneratorModel::ExternalGeneratorModel(std::shared_ptr<AdapterPool> pool, DomainKind domain_kind)
    : pool_(std::move(pool)), domain_(generator_domain(pool_->capabilities(), domain_kind)) {}

std::vector<ImageSample> ExternalGeneratorModel::generate_batch(std::span<const LatentCode> codes) const {
  for (const auto &z : codes) check_code(z);
  const Shape shape = output_shape();
  const auto bounds = chunk_bounds(codes.size(), pool_->size());
  std::vector<ImageSample> out(codes.size());
  parallel_for(bounds.size() - 1, [&](std::size_t c) {
    const auto part = codes.subspan(bounds[c], bounds[c + 1] - bounds[c]);
    if (part.empty()) return;
    const auto pixels = pool_->with_connection(c, [&](AdapterConnection &conn) { return conn.generate(part); });
    long clamped = 0;
    for (std::size_t k = 0; k < part.size(); ++k) {
      std::vector<float> data(pixels.begin() + static_cast<std::ptrdiff_t>(k * shape.size()),
                              pixels.begin() + static_cast<std::ptrdiff_t>((k + 1) * shape.size()));
      clamped += std::count_if(data.begin(), data.end(), [](float v) { return v < 0.0f || v > 1.0f; });
      out[bounds[c] + k] = ImageSample(shape, std::move(data));
    }
    if (clamped > 0) {
      clamp_warnings_ += clamped;
      logger().warn("generator returned {} out-of-range pixels; clamped to [0,1]", clamped);
    }
  });
  return out;
}

ImageSample ExternalGeneratorModel::generate_unchecked(const LatentCode &z) const {
  return generate_batch(std::span<const LatentCode>(&z, 1)).front();
}

Detector connect_external_detector(const EndpointSpec &spec) {
  auto pool = std::make_shared<AdapterPool>(spec);
  return Detector(std::make_shared<ExternalDetectorModel>(std::move(pool)));
}

std::unique_ptr<ExternalGeneratorModel> connect_external_generator(const EndpointSpec &spec, DomainKind domain_kind) {
  auto pool = std::make_shared<AdapterPool>(spec);
  return std::make_unique<ExternalGeneratorModel>(std::move(pool), domain_kind);
}

// ---------------------------------------------------------------------------
// Adapter side

void serve_adapter(Transport &transport, const AdapterHandlers &h) {
  using protocol::WireError;
  constexpr std::chrono::hours kIdle{24};
  const auto &caps = h.capabilities;
  auto send_error = [&](WireError code, const std::string &message) {
    write_frame(transport, protocol::make_error(static_cast<std::uint32_t>(code), message));
  };

  for (;;) {
    auto frame = read_frame(transport, kIdle);
    if (!frame) return;
    const auto type = frame->type;
    try {
      if (type == static_cast<std::uint8_t>(MsgType::kHello)) {
        const auto version = protocol::parse_hello(*frame);
        if (version != protocol::kVersion) {
          send_error(WireError::kUnsupportedVersion, fmt::format("unsupported version {}", version));
        } else {
          write_frame(transport, protocol::make_hello_ack(caps));
        }
      } else if (type == static_cast<std::uint8_t>(MsgType::kScoreReq)) {
        if (caps.role != protocol::Role::kDetector || !h.score) {
          send_error(WireError::kBadRequest, "this adapter does not score");
          continue;
        }
        std::uint32_t batch = 0;
        const auto pixels = protocol::parse_score_request(*frame, caps.shape, batch);
        std::vector<ImageSample> samples;
        samples.reserve(batch);
        for (std::uint32_t i = 0; i < batch; ++i) {
          samples.emplace_back(caps.shape, std::vector<float>(pixels.begin() + static_cast<std::ptrdiff_t>(i * caps.shape.size()),
                                                              pixels.begin() + static_cast<std::ptrdiff_t>((i + 1) * caps.shape.size())));
        }
        std::vector<double> scores;
        try {
          scores = h.score(samples);
        } catch (const std::exception &e) {
          send_error(WireError::kHandlerFailure, e.what());
          continue;
        }
        if (scores.size() != batch) {
          send_error(WireError::kHandlerFailure, fmt::format("callable returned {} scores for {} rows", scores.size(), batch));
          continue;
        }
        write_frame(transport, protocol::make_score_response(scores));
      } else if (type == static_cast<std::uint8_t>(MsgType::kGenReq)) {
        if (caps.role != protocol::Role::kGenerator || !h.generate) {
          send_error(WireError::kBadRequest, "this adapter does not generate");
          continue;
        }
        std::uint32_t batch = 0, dim = 0;
        const auto latents = protocol::parse_gen_request(*frame, batch, dim);
        if (dim != caps.latent_dim) {
          send_error(WireError::kBadRequest, fmt::format("latent_dim {} does not match declared {}", dim, caps.latent_dim));
          continue;
        }
        std::vector<float> pixels;
        try {
          pixels = h.generate(batch, latents);
        } catch (const std::exception &e) {
          send_error(WireError::kHandlerFailure, e.what());
          continue;
        }
        if (pixels.size() != static_cast<std::size_t>(batch) * caps.shape.size()) {
          send_error(WireError::kHandlerFailure, "callable returned the wrong number of pixels");
          continue;
        }
        write_frame(transport, protocol::make_gen_response(batch, pixels));
      } else {
        send_error(WireError::kUnknownType, fmt::format("unknown message type {}", type));
      }
    } catch (const ProtocolError &e) {
      // Malformed payload inside a well-framed message.
      send_error(WireError::kBadRequest, e.what());
    } catch (const NumericError &e) {
      send_error(WireError::kBadRequest, e.what());
    }
  }
}

}  // namespace evg
