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

#include <bit>
#include <cmath>
#include <fstream>

#include "evg/error.hpp"
#include "evg/tensor_io.hpp"
#include "test_util.hpp"

using namespace evg;

namespace {

void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Hand-assembled EVGT bytes; independent of save_raw_tensor.
std::string evgt_bytes(std::uint32_t n, std::uint32_t h, std::uint32_t w, std::uint32_t c,
                       const std::vector<float> &payload) {
  std::string out = "EVGT";
  put_u32(out, 4);
  for (auto d : {n, h, w, c}) put_u32(out, d);
  for (float f : payload) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

void write_bytes(const std::filesystem::path &p, const std::string &bytes) {
  std::ofstream f(p, std::ios::binary);
  f << bytes;
}

}  // namespace

TEST_SUITE("tensor_io") {
  TEST_CASE("image sample clamps and rejects NaN") {
    const Shape s{1, 2, 1};
    const ImageSample x(s, {-0.5f, 1.5f});
    CHECK(x.data()[0] == 0.0f);
    CHECK(x.data()[1] == 1.0f);
    CHECK_THROWS_AS(ImageSample(s, {0.1f, std::nanf("")}), NumericError);
    CHECK_THROWS_AS(ImageSample(s, {0.1f}), InvalidArgument);
  }

  TEST_CASE("row-major channels-last indexing") {
    const Shape s{2, 3, 3};
    std::vector<float> px(s.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(i) / 100.0f;
    const ImageSample x(s, px);
    CHECK(x.at(1, 2, 1) == doctest::Approx(((1 * 3 + 2) * 3 + 1) / 100.0));
  }

  TEST_CASE("dataset requires uniform shape") {
    std::vector<ImageSample> v = {ImageSample::filled({2, 2, 1}, 0.1f), ImageSample::filled({2, 3, 1}, 0.1f)};
    CHECK_THROWS_WITH_AS(Dataset(v, Split::kTrain), doctest::Contains("shape mismatch"), FormatError);
    CHECK_THROWS_AS(Dataset({}, Split::kTrain), InvalidArgument);
  }

  TEST_CASE("raw tensor (2,2,2,3) with 24 floats loads as two 2x2x3 samples") {
    test::TempDir dir;
    std::vector<float> payload(24);
    for (int i = 0; i < 24; ++i) payload[i] = static_cast<float>(i) / 23.0f;
    write_bytes(dir / "t.evgt", evgt_bytes(2, 2, 2, 3, payload));
    const auto ds = load_dataset(dir / "t.evgt", DatasetFormat::kRawTensor);
    REQUIRE(ds.size() == 2);
    CHECK(ds.shape() == Shape{2, 2, 3});
    CHECK(ds[1].data()[11] == payload[23]);
    CHECK(ds[0].data()[0] == payload[0]);
  }

  TEST_CASE("raw tensor round-trips bit-exactly") {
    test::TempDir dir;
    const auto imgs = test::random_images({3, 4, 3}, 5, 11);
    save_raw_tensor(imgs, dir / "r.evgt");
    const auto ds = load_dataset(dir / "r.evgt", DatasetFormat::kRawTensor);
    REQUIRE(ds.size() == imgs.size());
    for (std::size_t i = 0; i < imgs.size(); ++i) CHECK(ds[i] == imgs[i]);
  }

  TEST_CASE("raw tensor errors") {
    test::TempDir dir;
    write_bytes(dir / "short.evgt", evgt_bytes(2, 2, 2, 3, std::vector<float>(20, 0.5f)));
    CHECK_THROWS_WITH_AS(load_dataset(dir / "short.evgt", DatasetFormat::kRawTensor),
                         doctest::Contains("truncated payload"), FormatError);
    write_bytes(dir / "magic.evgt", "EVGX" + evgt_bytes(1, 1, 1, 1, {0.5f}).substr(4));
    CHECK_THROWS_WITH_AS(load_dataset(dir / "magic.evgt", DatasetFormat::kRawTensor),
                         doctest::Contains("magic mismatch"), FormatError);
    CHECK_THROWS_WITH_AS(load_dataset(dir / "nope.evgt", DatasetFormat::kRawTensor),
                         doctest::Contains("missing path"), IoError);
  }

  TEST_CASE("png directory loads in lexicographic filename order") {
    test::TempDir dir;
    std::filesystem::create_directories(dir / "pngs");
    const Shape s{32, 32, 3};
    // Written out of order; values are exact multiples of 1/255.
    const std::vector<std::pair<std::string, float>> files = {{"b.png", 51 / 255.0f}, {"c.png", 102 / 255.0f},
                                                              {"a.png", 204 / 255.0f}};
    for (const auto &[name, v] : files) {
      const ImageSample img = ImageSample::filled(s, v);
      save_sample_grid(std::span<const ImageSample>(&img, 1), 1, dir / "pngs" / name);
    }
    const auto ds = load_dataset(dir / "pngs", DatasetFormat::kPngDir);
    REQUIRE(ds.size() == 3);
    CHECK(ds.shape() == s);
    CHECK(ds[0].data()[0] == doctest::Approx(204 / 255.0).epsilon(1e-7));
    CHECK(ds[1].data()[0] == doctest::Approx(51 / 255.0).epsilon(1e-7));
    CHECK(ds[2].data()[0] == doctest::Approx(102 / 255.0).epsilon(1e-7));
  }

  TEST_CASE("undecodable png is a format error") {
    test::TempDir dir;
    std::filesystem::create_directories(dir / "bad");
    write_bytes(dir / "bad" / "x.png", "not a png at all");
    CHECK_THROWS_AS(load_dataset(dir / "bad", DatasetFormat::kPngDir), FormatError);
  }

  TEST_CASE("sample grid layout and padding") {
    test::TempDir dir;
    const Shape s{2, 3, 3};
    std::vector<ImageSample> five;
    for (int i = 0; i < 5; ++i) five.push_back(ImageSample::filled(s, 1.0f));
    save_sample_grid(five, 2, dir / "g.png");
    const auto g = load_png(dir / "g.png");
    CHECK(g.shape() == Shape{6, 6, 3});
    CHECK(g.at(5, 5, 0) == 0.0f);  // empty last cell
    CHECK(g.at(5, 2, 0) == 1.0f);
    CHECK(g.at(0, 5, 2) == 1.0f);

    std::vector<ImageSample> four(five.begin(), five.begin() + 4);
    save_sample_grid(four, 2, dir / "g4.png");
    CHECK(load_png(dir / "g4.png").shape() == Shape{4, 6, 3});
    CHECK_THROWS_WITH(save_sample_grid({}, 2, dir / "e.png"), doctest::Contains("empty grid"));
    CHECK_THROWS_AS(save_sample_grid(four, 2, dir / "missing" / "g.png"), IoError);
  }

  TEST_CASE("score CSV keeps at least nine significant digits") {
    test::TempDir dir;
    const ScoreVector v({1.0 / 3.0, -2.718281828459045, 1e-12, 12345678.9});
    save_scores(v, dir / "s.csv");
    std::ifstream f(dir / "s.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "index,score");
    const auto back = load_scores(dir / "s.csv");
    REQUIRE(back.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(std::abs(back[i] - v[i]) <= 1e-9 * std::abs(v[i]));
    }
  }

  TEST_CASE("score vector rejects non-finite entries") {
    CHECK_THROWS_AS(ScoreVector({1.0, INFINITY}), NumericError);
  }
}
