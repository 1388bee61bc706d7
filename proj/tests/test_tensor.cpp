/* Copyright 2026 The tokscale Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "tokscale/error.hpp"
#include "tokscale/tensor.hpp"

using namespace tokscale;
using tokscale::testing::Gen;
using tokscale::testing::random_map;

namespace {

// Scalar align-corners-false source coordinate, written independently of the
// library's sampling helper.
double source_coord(std::size_t i, std::size_t in, std::size_t out) {
  const double x = (i + 0.5) * in / out - 0.5;
  return std::clamp(x, 0.0, static_cast<double>(in - 1));
}

double scalar_bilinear(const FeatureMap& m, double y, double x, std::size_t c) {
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, m.height() - 1);
  const std::size_t x1 = std::min(x0 + 1, m.width() - 1);
  const double dy = y - y0, dx = x - x0;
  return (1 - dy) * ((1 - dx) * m.at(y0, x0, c) + dx * m.at(y0, x1, c)) +
         dy * ((1 - dx) * m.at(y1, x0, c) + dx * m.at(y1, x1, c));
}

}  // namespace

TEST_CASE("feature map construction checks") {
  CHECK_THROWS_AS(FeatureMap(0, 2, 1), InvalidArgument);
  CHECK_THROWS_AS(FeatureMap(2, 2, 1, std::vector<float>(3)), InvalidArgument);
  std::vector<float> bad(4, 0.0f);
  bad[2] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(FeatureMap(2, 2, 1, bad), InvalidArgument);
  bad[2] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(FeatureMap(2, 2, 1, bad), InvalidArgument);
  const FeatureMap m(1, 2, 2, {1, 2, 3, 4});
  CHECK(m.at(0, 1, 0) == 3.0f);
  CHECK(m.cell(0, 1)[1] == 4.0f);
}

TEST_CASE("image values stay in [0, 1] with 1 or 3 channels") {
  CHECK_THROWS_AS(Image(1, 1, 2, {0.5f, 0.5f}), InvalidArgument);
  CHECK_THROWS_AS(Image(1, 1, 1, {1.5f}), InvalidArgument);
  CHECK_NOTHROW(Image(1, 1, 1, {1.0f}));
}

TEST_CASE("bilinear 2x2 to 4x4 against the scalar oracle") {
  const FeatureMap src(2, 2, 1, {0, 1, 2, 3});
  const FeatureMap out = interpolate_bilinear(src, 4, 4);
  REQUIRE(out.height() == 4);
  REQUIRE(out.width() == 4);
  const double axis[4] = {0.0, 0.25, 0.75, 1.0};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(out.at(i, j, 0) == doctest::Approx(2 * axis[i] + axis[j]).epsilon(1e-7));
      const double want =
          scalar_bilinear(src, source_coord(i, 2, 4), source_coord(j, 2, 4), 0);
      CHECK(out.at(i, j, 0) == static_cast<float>(want));
    }
  }
}

TEST_CASE("bilinear matches the scalar oracle on random maps") {
  Gen g(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t h = g.integer(1, 9), w = g.integer(1, 9), c = g.integer(1, 3);
    const std::size_t oh = g.integer(1, 17), ow = g.integer(1, 17);
    const FeatureMap src = random_map(g, h, w, c);
    const FeatureMap out = interpolate_bilinear(src, oh, ow);
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        for (std::size_t k = 0; k < c; ++k) {
          const double want =
              scalar_bilinear(src, source_coord(i, h, oh), source_coord(j, w, ow), k);
          CHECK(out.at(i, j, k) == doctest::Approx(want).epsilon(1e-6));
        }
      }
    }
  }
}

TEST_CASE("bilinear identity and constant maps") {
  Gen g(3);
  const FeatureMap m = random_map(g, 5, 7, 2);
  CHECK(interpolate_bilinear(m, 5, 7) == m);
  const FeatureMap k = FeatureMap::filled(3, 4, 2, 0.1f);
  const FeatureMap up = interpolate_bilinear(k, 11, 5);
  for (float v : up.data()) CHECK(v == 0.1f);
  CHECK_THROWS_AS(interpolate_bilinear(m, 0, 3), InvalidArgument);
}

TEST_CASE("bilinear reproduces affine fields inside the clamp region") {
  // Interpolating an affine function is exact up to float rounding.
  const std::size_t h = 6, w = 9;
  std::vector<float> v(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) v[r * w + c] = 0.5f * r - 0.25f * c + 1.0f;
  }
  const FeatureMap src(h, w, 1, v);
  const FeatureMap out = interpolate_bilinear(src, 13, 4);
  for (std::size_t i = 0; i < 13; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double y = source_coord(i, h, 13), x = source_coord(j, w, 4);
      CHECK(out.at(i, j, 0) == doctest::Approx(0.5 * y - 0.25 * x + 1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("block average") {
  CHECK(block_average(FeatureMap::filled(4, 4, 1, 1.0f), 2, 2) ==
        FeatureMap::filled(2, 2, 1, 1.0f));
  CHECK(block_average(FeatureMap(2, 2, 1, {0, 1, 2, 3}), 2, 2).at(0, 0, 0) == 1.5f);
  CHECK_THROWS_AS(block_average(FeatureMap(3, 3, 1), 2, 2), InvalidArgument);
  CHECK_THROWS_AS(block_average(FeatureMap(3, 3, 1), 0, 1), InvalidArgument);

  Gen g(5);
  const FeatureMap m = random_map(g, 6, 6, 2);
  const FeatureMap avg = block_average(m, 3, 3);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t c = 0; c < 2; ++c) {
        double s = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
          for (std::size_t b = 0; b < 3; ++b) s += m.at(3 * i + a, 3 * j + b, c);
        }
        CHECK(avg.at(i, j, c) == doctest::Approx(s / 9.0).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("block average undoes nearest upsampling") {
  Gen g(8);
  const FeatureMap m = random_map(g, 4, 5, 3);
  const FeatureMap up = upsample_nearest(m, 3, 2);
  CHECK(up.height() == 12);
  CHECK(up.width() == 10);
  CHECK(up.at(5, 3, 1) == m.at(1, 1, 1));
  CHECK(block_average(up, 3, 2) == m);
}

TEST_CASE("concat and slice channels") {
  Gen g(9);
  const FeatureMap a = random_map(g, 3, 4, 3);
  const FeatureMap b = random_map(g, 3, 4, 5);
  const FeatureMap c = random_map(g, 3, 4, 1);
  const FeatureMap one[] = {a};
  CHECK(concat_channels(one) == a);
  const FeatureMap maps[] = {a, b, c};
  const FeatureMap cat = concat_channels(maps);
  CHECK(cat.channels() == 9);
  CHECK(slice_channels(cat, 0, 3) == a);
  CHECK(slice_channels(cat, 3, 5) == b);
  CHECK(slice_channels(cat, 8, 1) == c);
  CHECK_THROWS_AS(slice_channels(cat, 8, 2), InvalidArgument);
  const FeatureMap mismatch[] = {a, random_map(g, 2, 4, 1)};
  CHECK_THROWS_AS(concat_channels(mismatch), InvalidArgument);
  CHECK_THROWS_AS(concat_channels(std::span<const FeatureMap>{}), InvalidArgument);
}

TEST_CASE("split and stitch blocks round trip") {
  Gen g(10);
  const FeatureMap m = random_map(g, 64, 64, 3);
  const auto blocks = split_blocks(m, 2, 2);
  REQUIRE(blocks.size() == 4);
  CHECK(blocks[1].at(0, 0, 0) == m.at(0, 32, 0));
  CHECK(blocks[2].at(0, 0, 2) == m.at(32, 0, 2));
  CHECK(stitch_blocks(blocks, 2, 2) == m);
  CHECK_THROWS_AS(split_blocks(m, 3, 1), InvalidArgument);
  CHECK_THROWS_AS(stitch_blocks(blocks, 1, 3), InvalidArgument);
}

TEST_CASE("mean value") {
  CHECK(mean_value(FeatureMap(2, 2, 1, {0, 1, 2, 3})) == 1.5);
}
