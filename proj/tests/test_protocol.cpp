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

#include <fstream>
#include <iterator>
#include <random>

#include <json.hpp>

#include "evg/error.hpp"
#include "evg/protocol.hpp"
#include "evg/remote.hpp"
#include "evg/transport.hpp"
#include "test_util.hpp"

using namespace evg;
using namespace evg::protocol;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path &p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

json manifest() {
  std::ifstream f(test::testdata_dir() / "golden" / "manifest.json");
  REQUIRE(f);
  return json::parse(f);
}

struct Golden {
  json fields;
  std::vector<std::uint8_t> bytes;
  Frame frame;
};

Golden golden(const std::string &name) {
  for (const auto &e : manifest()) {
    if (e.at("name") == name) {
      Golden g;
      g.fields = e.at("fields");
      g.bytes = read_bytes(test::testdata_dir() / "golden" / e.at("file").get<std::string>());
      CHECK(g.bytes.size() == e.at("size").get<std::size_t>());
      g.frame = decode_frame(g.bytes);
      CHECK(g.frame.type == e.at("type").get<int>());
      return g;
    }
  }
  FAIL("no golden vector " << name);
  return {};
}

Shape shape_of(const json &j) { return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()}; }

std::vector<ImageSample> images(const Shape &shape, const std::vector<float> &px) {
  std::vector<ImageSample> out;
  for (std::size_t i = 0; i < px.size(); i += shape.size()) {
    out.emplace_back(shape, std::vector<float>(px.begin() + static_cast<long>(i),
                                               px.begin() + static_cast<long>(i + shape.size())));
  }
  return out;
}

std::vector<float> as_f32(const json &j) {
  std::vector<float> out;
  for (const auto &v : j) out.push_back(static_cast<float>(v.get<double>()));
  return out;
}

AdapterHandlers mean_detector(const Shape &shape) {
  AdapterHandlers h;
  h.capabilities = {kVersion, Role::kDetector, shape, 0};
  h.score = [](std::span<const ImageSample> batch) {
    std::vector<double> out;
    for (const auto &s : batch) {
      double sum = 0.0;
      for (float v : s.data()) sum += v;
      out.push_back(sum / static_cast<double>(s.size()));
    }
    return out;
  };
  return h;
}

std::vector<Frame> replies(const std::vector<std::uint8_t> &written) {
  std::vector<Frame> out;
  std::size_t pos = 0;
  while (pos < written.size()) {
    std::uint8_t type = 0;
    const auto len = decode_header(std::span(written).subspan(pos, kHeaderSize), type);
    out.push_back(decode_frame(std::span(written).subspan(pos, kHeaderSize + len)));
    pos += kHeaderSize + len;
  }
  return out;
}

std::vector<std::uint8_t> concat(std::initializer_list<Frame> frames) {
  std::vector<std::uint8_t> out;
  for (const auto &f : frames) {
    const auto b = encode_frame(f);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("golden hello") {
    const auto g = golden("hello_v1");
    CHECK(parse_hello(g.frame) == g.fields.at("version").get<int>());
    CHECK(encode_frame(make_hello()) == g.bytes);
  }

  TEST_CASE("golden hello acks") {
    for (const auto *name : {"hello_ack_detector_32x32x3", "hello_ack_generator_64"}) {
      const auto g = golden(name);
      const auto caps = parse_hello_ack(g.frame);
      CHECK(caps.version == g.fields.at("version").get<int>());
      CHECK(static_cast<int>(caps.role) == g.fields.at("role").get<int>());
      CHECK(caps.shape == shape_of(g.fields.at("shape")));
      CHECK(caps.latent_dim == g.fields.at("latent_dim").get<std::uint32_t>());
      CHECK(encode_frame(make_hello_ack(caps)) == g.bytes);
    }
  }

  TEST_CASE("golden score requests") {
    for (const auto *name : {"score_req_2x2x3_batch2", "score_req_empty"}) {
      const auto g = golden(name);
      const Shape shape = shape_of(g.fields.at("shape"));
      std::uint32_t batch = 99;
      const auto px = parse_score_request(g.frame, shape, batch);
      CHECK(batch == g.fields.at("batch").get<std::uint32_t>());
      CHECK(px == as_f32(g.fields.at("pixels")));
      CHECK(encode_frame(make_score_request(images(shape, px))) == g.bytes);
    }
  }

  TEST_CASE("golden score response") {
    const auto g = golden("score_resp_3");
    const auto scores = parse_score_response(g.frame);
    const auto want = as_f32(g.fields.at("scores"));
    REQUIRE(scores.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(scores[i] == static_cast<double>(want[i]));
    std::vector<double> d;
    for (const auto &v : g.fields.at("scores")) d.push_back(v.get<double>());
    CHECK(encode_frame(make_score_response(d)) == g.bytes);
  }

  TEST_CASE("golden generate request and response") {
    auto g = golden("gen_req_batch1_dim3");
    std::uint32_t batch = 0, dim = 0;
    const auto z = parse_gen_request(g.frame, batch, dim);
    CHECK(batch == 1);
    CHECK(dim == 3);
    CHECK(z == as_f32(g.fields.at("latents")));
    const std::vector<LatentCode> codes = {{g.fields.at("latents").get<std::vector<double>>()}};
    CHECK(encode_frame(make_gen_request(codes, 3)) == g.bytes);

    g = golden("gen_resp_2x2x3");
    const auto px = parse_gen_response(g.frame, shape_of(g.fields.at("shape")), batch);
    CHECK(batch == 1);
    CHECK(px == as_f32(g.fields.at("pixels")));
    CHECK(encode_frame(make_gen_response(1, px)) == g.bytes);
  }

  TEST_CASE("golden errors") {
    for (const auto *name : {"error_version", "error_handler_utf8"}) {
      const auto g = golden(name);
      const auto e = parse_error(g.frame);
      CHECK(e.code == g.fields.at("code").get<std::uint32_t>());
      CHECK(e.message == g.fields.at("message").get<std::string>());
      CHECK(encode_frame(make_error(e.code, e.message)) == g.bytes);
    }
  }

  TEST_CASE("header layout") {
    CHECK(encode_header(3, 0x01020304) == std::vector<std::uint8_t>{'E', 'V', 'G', 'P', 3, 4, 3, 2, 1});
    std::uint8_t type = 0;
    CHECK(decode_header(encode_header(7, 12), type) == 12);
    CHECK(type == 7);
  }

  TEST_CASE("framing errors") {
    auto bytes = encode_frame(make_hello());
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_frame(bad), ProtocolError);
    CHECK_THROWS_AS(decode_frame(std::span(bytes).first(5)), ProtocolError);
    CHECK_THROWS_AS(decode_frame(std::span(bytes).first(bytes.size() - 1)), ProtocolError);
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_frame(bad), ProtocolError);
    std::uint8_t type = 0;
    CHECK_THROWS_AS(decode_header(encode_header(1, kMaxPayload + 1), type), ProtocolError);
  }

  TEST_CASE("payload errors") {
    const Shape shape{2, 2, 3};
    std::uint32_t batch = 0, dim = 0;
    CHECK_THROWS_AS(parse_hello(make_score_response(std::vector<double>{1.0})), ProtocolError);
    Frame f = make_hello();
    f.payload.push_back(0);
    CHECK_THROWS_AS(parse_hello(f), ProtocolError);
    f = make_score_request(test::random_images(shape, 2, 1));
    f.payload.pop_back();
    CHECK_THROWS_AS(parse_score_request(f, shape, batch), ProtocolError);
    f = make_score_request(test::random_images(shape, 1, 1));
    CHECK_THROWS_AS(parse_score_request(f, Shape{1, 1, 3}, batch), ProtocolError);
    f = make_gen_request(std::vector<LatentCode>{{{0.1, 0.2}}}, 2);
    f.payload[0] = 0xff;
    CHECK_THROWS_AS(parse_gen_request(f, batch, dim), ProtocolError);
    Capabilities caps{kVersion, Role::kDetector, shape, 0};
    f = make_hello_ack(caps);
    f.payload[2] = 9;
    CHECK_THROWS_AS(parse_hello_ack(f), ProtocolError);
    f = make_hello_ack(caps);
    f.payload[3] = 0;
    CHECK_THROWS_AS(parse_hello_ack(f), ProtocolError);
    CHECK_THROWS_AS(make_gen_request(std::vector<LatentCode>{{{0.1}}}, 2), InvalidArgument);
  }

  TEST_CASE("serve_adapter answers requests and reports errors in band") {
    const Shape shape{2, 2, 3};
    auto h = mean_detector(shape);
    const auto batch = test::random_images(shape, 3, 5);
    MemoryTransport t(concat({make_hello(), make_score_request(batch), Frame{42, {}}, make_gen_request({}, 0),
                              make_score_request(test::random_images(Shape{1, 1, 3}, 1, 2)), make_hello(2)}));
    serve_adapter(t, h);
    const auto r = replies(t.written());
    REQUIRE(r.size() == 6);
    CHECK(parse_hello_ack(r[0]) == h.capabilities);
    const auto scores = parse_score_response(r[1]);
    const auto want = h.score(batch);
    REQUIRE(scores.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(scores[i] == doctest::Approx(want[i]).epsilon(1e-6));
    CHECK(parse_error(r[2]).code == static_cast<std::uint32_t>(WireError::kUnknownType));
    CHECK(parse_error(r[3]).code == static_cast<std::uint32_t>(WireError::kBadRequest));
    CHECK(parse_error(r[4]).code == static_cast<std::uint32_t>(WireError::kBadRequest));
    CHECK(parse_error(r[5]).code == static_cast<std::uint32_t>(WireError::kUnsupportedVersion));
  }

  TEST_CASE("serve_adapter turns handler failures into error frames") {
    const Shape shape{2, 2, 3};
    auto h = mean_detector(shape);
    h.score = [](std::span<const ImageSample>) -> std::vector<double> { throw std::runtime_error("boom"); };
    MemoryTransport t(concat({make_hello(), make_score_request(test::random_images(shape, 1, 1))}));
    serve_adapter(t, h);
    const auto r = replies(t.written());
    REQUIRE(r.size() == 2);
    const auto e = parse_error(r[1]);
    CHECK(e.code == static_cast<std::uint32_t>(WireError::kHandlerFailure));
    CHECK(e.message.find("boom") != std::string::npos);

    h.score = [](std::span<const ImageSample>) { return std::vector<double>{1.0, 2.0}; };
    MemoryTransport t2(concat({make_hello(), make_score_request(test::random_images(shape, 1, 1))}));
    serve_adapter(t2, h);
    CHECK(parse_error(replies(t2.written())[1]).code == static_cast<std::uint32_t>(WireError::kHandlerFailure));
  }

  TEST_CASE("fuzzed frames never crash either side") {
    const Shape shape{2, 2, 3};
    const auto h = mean_detector(shape);
    std::vector<std::vector<std::uint8_t>> seeds;
    for (const auto &e : manifest()) {
      seeds.push_back(read_bytes(test::testdata_dir() / "golden" / e.at("file").get<std::string>()));
    }
    std::mt19937_64 rng(0xf022);
    int decoded = 0, rejected = 0;
    for (int t = 0; t < 10000; ++t) {
      auto bytes = seeds[rng() % seeds.size()];
      switch (rng() % 4) {
        case 0:
          bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
          break;
        case 1:
          bytes.resize(rng() % bytes.size());
          break;
        case 2:
          bytes[4 + rng() % 5] = static_cast<std::uint8_t>(rng());
          break;
        default:
          for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>(rng()));
      }
      try {
        const auto f = decode_frame(bytes);
        ++decoded;
        try {
          switch (f.type) {
            case 1: parse_hello(f); break;
            case 2: parse_hello_ack(f); break;
            case 3: {
              std::uint32_t b = 0;
              parse_score_request(f, shape, b);
              break;
            }
            case 4: parse_score_response(f); break;
            case 7: parse_error(f); break;
            default: break;
          }
        } catch (const ProtocolError &) {
        }
      } catch (const ProtocolError &) {
        ++rejected;
      }

      auto stream = encode_frame(make_hello());
      stream.insert(stream.end(), bytes.begin(), bytes.end());
      MemoryTransport mt(stream);
      try {
        serve_adapter(mt, h);
        for (const auto &r : replies(mt.written())) CHECK(r.type >= 2);
      } catch (const ProtocolError &) {
      }
    }
    CHECK(decoded > 0);
    CHECK(rejected > 0);
  }

  TEST_CASE("memory transport eof and partial frames") {
    MemoryTransport empty;
    CHECK_FALSE(read_frame(empty).has_value());
    MemoryTransport partial({'E', 'V'});
    CHECK_THROWS_AS(read_frame(partial), ProtocolError);
    auto bytes = encode_frame(make_hello());
    bytes.pop_back();
    MemoryTransport cut(bytes);
    CHECK_THROWS_AS(read_frame(cut), ProtocolError);
  }
}
