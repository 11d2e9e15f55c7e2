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
#include "evg/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include <fmt/format.h>

#include "evg/error.hpp"

namespace evg::protocol {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void reserve(std::size_t n) { bytes_.reserve(n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::string_view what) : bytes_(bytes), what_(what) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::vector<float> f32s(std::uint64_t n) {
    if (n > remaining() / 4) {
      throw ProtocolError(fmt::format("{}: truncated payload ({} floats declared, {} bytes left)", what_, n,
                                      remaining()));
    }
    std::vector<float> out(static_cast<std::size_t>(n));
    for (auto &v : out) v = f32();
    return out;
  }
  std::string rest() {
    std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), remaining());
    pos_ = bytes_.size();
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void finish() const {
    if (remaining() != 0) throw ProtocolError(fmt::format("{}: {} trailing bytes", what_, remaining()));
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw ProtocolError(fmt::format("{}: truncated payload", what_));
  }

  std::span<const std::uint8_t> bytes_;
  std::string_view what_;
  std::size_t pos_ = 0;
};

void expect_type(const Frame &frame, MsgType type) {
  if (frame.type != static_cast<std::uint8_t>(type)) {
    throw ProtocolError(fmt::format("expected {} frame, got {}", type_name(static_cast<std::uint8_t>(type)),
                                    type_name(frame.type)));
  }
}

}  // namespace

std::string_view type_name(std::uint8_t type) {
  switch (type) {
    case 1: return "HELLO";
    case 2: return "HELLO_ACK";
    case 3: return "SCORE_REQ";
    case 4: return "SCORE_RESP";
    case 5: return "GEN_REQ";
    case 6: return "GEN_RESP";
    case 7: return "ERROR";
    default: return "UNKNOWN";
  }
}

std::vector<std::uint8_t> encode_header(std::uint8_t type, std::uint32_t payload_len) {
  Writer w;
  for (auto b : kMagic) w.u8(b);
  w.u8(type);
  w.u32(payload_len);
  return w.take();
}

std::vector<std::uint8_t> encode_frame(const Frame &frame) {
  if (frame.payload.size() > kMaxPayload) throw ProtocolError("frame payload too large");
  auto out = encode_header(frame.type, static_cast<std::uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

std::uint32_t decode_header(std::span<const std::uint8_t> header, std::uint8_t &type) {
  if (header.size() < kHeaderSize) throw ProtocolError("truncated frame header");
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) {
    throw ProtocolError(fmt::format("bad frame magic {:02x}{:02x}{:02x}{:02x}", header[0], header[1], header[2],
                                    header[3]));
  }
  type = header[4];
  Reader r(header.subspan(5, 4), "frame header");
  const std::uint32_t len = r.u32();
  if (len > kMaxPayload) throw ProtocolError(fmt::format("frame payload length {} exceeds limit", len));
  return len;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  Frame f;
  const std::uint32_t len = decode_header(bytes, f.type);
  if (bytes.size() - kHeaderSize < len) {
    throw ProtocolError(fmt::format("truncated frame: payload_len {}, {} bytes present", len,
                                    bytes.size() - kHeaderSize));
  }
  if (bytes.size() - kHeaderSize > len) throw ProtocolError("trailing bytes after frame");
  f.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
  return f;
}

Frame make_hello(std::uint16_t version) {
  Writer w;
  w.u16(version);
  return {static_cast<std::uint8_t>(MsgType::kHello), w.take()};
}

std::uint16_t parse_hello(const Frame &frame) {
  expect_type(frame, MsgType::kHello);
  Reader r(frame.payload, "HELLO");
  const auto v = r.u16();
  r.finish();
  return v;
}

Frame make_hello_ack(const Capabilities &caps) {
  Writer w;
  w.u16(caps.version);
  w.u8(static_cast<std::uint8_t>(caps.role));
  w.u32(static_cast<std::uint32_t>(caps.shape.height));
  w.u32(static_cast<std::uint32_t>(caps.shape.width));
  w.u32(static_cast<std::uint32_t>(caps.shape.channels));
  w.u32(caps.latent_dim);
  return {static_cast<std::uint8_t>(MsgType::kHelloAck), w.take()};
}

Capabilities parse_hello_ack(const Frame &frame) {
  expect_type(frame, MsgType::kHelloAck);
  Reader r(frame.payload, "HELLO_ACK");
  Capabilities c;
  c.version = r.u16();
  const std::uint8_t role = r.u8();
  if (role != 1 && role != 2) throw ProtocolError(fmt::format("HELLO_ACK: unknown role {}", role));
  c.role = static_cast<Role>(role);
  const std::uint32_t h = r.u32(), w = r.u32(), ch = r.u32();
  c.latent_dim = r.u32();
  r.finish();
  constexpr std::uint32_t kMaxSide = 1u << 16;
  if (h == 0 || w == 0 || ch == 0 || h > kMaxSide || w > kMaxSide || ch > 64) {
    throw ProtocolError(fmt::format("HELLO_ACK: invalid shape {}x{}x{}", h, w, ch));
  }
  c.shape = Shape{static_cast<int>(h), static_cast<int>(w), static_cast<int>(ch)};
  return c;
}

Frame make_score_request(std::span<const ImageSample> batch) {
  Writer w;
  const std::size_t per = batch.empty() ? 0 : batch.front().size();
  w.reserve(4 + batch.size() * per * 4);
  w.u32(static_cast<std::uint32_t>(batch.size()));
  for (const auto &s : batch) {
    for (float v : s.data()) w.f32(v);
  }
  return {static_cast<std::uint8_t>(MsgType::kScoreReq), w.take()};
}

std::vector<float> parse_score_request(const Frame &frame, const Shape &shape, std::uint32_t &batch) {
  expect_type(frame, MsgType::kScoreReq);
  Reader r(frame.payload, "SCORE_REQ");
  batch = r.u32();
  auto pixels = r.f32s(static_cast<std::uint64_t>(batch) * shape.size());
  r.finish();
  return pixels;
}

Frame make_score_response(std::span<const double> scores) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(scores.size()));
  for (double s : scores) w.f32(static_cast<float>(s));
  return {static_cast<std::uint8_t>(MsgType::kScoreResp), w.take()};
}

std::vector<double> parse_score_response(const Frame &frame) {
  expect_type(frame, MsgType::kScoreResp);
  Reader r(frame.payload, "SCORE_RESP");
  const std::uint32_t batch = r.u32();
  const auto f = r.f32s(batch);
  r.finish();
  return {f.begin(), f.end()};
}

Frame make_gen_request(std::span<const LatentCode> codes, std::uint32_t latent_dim) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(codes.size()));
  w.u32(latent_dim);
  for (const auto &z : codes) {
    if (z.coords.size() != latent_dim) throw InvalidArgument("latent code size differs from latent_dim");
    for (double c : z.coords) w.f32(static_cast<float>(c));
  }
  return {static_cast<std::uint8_t>(MsgType::kGenReq), w.take()};
}

std::vector<float> parse_gen_request(const Frame &frame, std::uint32_t &batch, std::uint32_t &latent_dim) {
  expect_type(frame, MsgType::kGenReq);
  Reader r(frame.payload, "GEN_REQ");
  batch = r.u32();
  latent_dim = r.u32();
  auto z = r.f32s(static_cast<std::uint64_t>(batch) * latent_dim);
  r.finish();
  return z;
}

Frame make_gen_response(std::uint32_t batch, std::span<const float> pixels) {
  Writer w;
  w.u32(batch);
  for (float v : pixels) w.f32(v);
  return {static_cast<std::uint8_t>(MsgType::kGenResp), w.take()};
}

std::vector<float> parse_gen_response(const Frame &frame, const Shape &shape, std::uint32_t &batch) {
  expect_type(frame, MsgType::kGenResp);
  Reader r(frame.payload, "GEN_RESP");
  batch = r.u32();
  auto pixels = r.f32s(static_cast<std::uint64_t>(batch) * shape.size());
  r.finish();
  return pixels;
}

Frame make_error(std::uint32_t code, std::string_view message) {
  Writer w;
  w.u32(code);
  w.raw(message);
  return {static_cast<std::uint8_t>(MsgType::kError), w.take()};
}

ErrorInfo parse_error(const Frame &frame) {
  expect_type(frame, MsgType::kError);
  Reader r(frame.payload, "ERROR");
  ErrorInfo e;
  e.code = r.u32();
  e.message = r.rest();
  return e;
}

}  // namespace evg::protocol
