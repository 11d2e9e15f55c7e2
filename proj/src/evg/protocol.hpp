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
#ifndef EVG_PROTOCOL_HPP_
#define EVG_PROTOCOL_HPP_

// Adapter wire protocol. Every frame is
//
//   "EVGP" | u8 msg_type | u32 payload_len | payload
//
// with all integers and floats little-endian. Payloads:
//
//   HELLO      u16 version (= 1)
//   HELLO_ACK  u16 version | u8 role (1 detector, 2 generator)
//              | u32 h | u32 w | u32 c | u32 latent_dim (0 for detectors)
//   SCORE_REQ  u32 batch | batch*h*w*c f32 pixels
//   SCORE_RESP u32 batch | batch f32 scores
//   GEN_REQ    u32 batch | u32 latent_dim | batch*latent_dim f32
//   GEN_RESP   u32 batch | batch*h*w*c f32 pixels
//   ERROR      u32 code | UTF-8 message (rest of payload)

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evg/tensor_io.hpp"
#include "evg/variation.hpp"

namespace evg::protocol {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'E', 'V', 'G', 'P'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 9;
inline constexpr std::uint32_t kMaxPayload = 1u << 30;

enum class MsgType : std::uint8_t {
  kHello = 1,
  kHelloAck = 2,
  kScoreReq = 3,
  kScoreResp = 4,
  kGenReq = 5,
  kGenResp = 6,
  kError = 7,
};

// Codes carried by ERROR frames.
enum class WireError : std::uint32_t {
  kUnsupportedVersion = 1,
  kBadRequest = 2,
  kHandlerFailure = 3,
  kUnknownType = 4,
};

enum class Role : std::uint8_t { kDetector = 1, kGenerator = 2 };

struct Frame {
  std::uint8_t type = 0;  // raw byte; may be an unknown type
  std::vector<std::uint8_t> payload;

  bool operator==(const Frame &) const = default;
};

struct Capabilities {
  std::uint16_t version = kVersion;
  Role role = Role::kDetector;
  Shape shape;
  std::uint32_t latent_dim = 0;

  bool operator==(const Capabilities &) const = default;
};

struct ErrorInfo {
  std::uint32_t code = 0;
  std::string message;
};

std::vector<std::uint8_t> encode_frame(const Frame &frame);
std::vector<std::uint8_t> encode_header(std::uint8_t type, std::uint32_t payload_len);
// Validates magic and length; returns payload_len.
std::uint32_t decode_header(std::span<const std::uint8_t> header, std::uint8_t &type);
// Exactly one frame spanning all of `bytes`.
Frame decode_frame(std::span<const std::uint8_t> bytes);

Frame make_hello(std::uint16_t version = kVersion);
std::uint16_t parse_hello(const Frame &frame);

Frame make_hello_ack(const Capabilities &caps);
Capabilities parse_hello_ack(const Frame &frame);

Frame make_score_request(std::span<const ImageSample> batch);
// Flattened pixels, batch * shape.size() values.
std::vector<float> parse_score_request(const Frame &frame, const Shape &shape, std::uint32_t &batch);

Frame make_score_response(std::span<const double> scores);
std::vector<double> parse_score_response(const Frame &frame);

Frame make_gen_request(std::span<const LatentCode> codes, std::uint32_t latent_dim);
std::vector<float> parse_gen_request(const Frame &frame, std::uint32_t &batch, std::uint32_t &latent_dim);

Frame make_gen_response(std::uint32_t batch, std::span<const float> pixels);
std::vector<float> parse_gen_response(const Frame &frame, const Shape &shape, std::uint32_t &batch);

Frame make_error(std::uint32_t code, std::string_view message);
ErrorInfo parse_error(const Frame &frame);

std::string_view type_name(std::uint8_t type);

}  // namespace evg::protocol

#endif  // EVG_PROTOCOL_HPP_
