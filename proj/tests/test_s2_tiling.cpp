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

#include <omp.h>

#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "tokscale/error.hpp"
#include "tokscale/s2_tiling.hpp"

using namespace tokscale;
using tokscale::testing::Gen;

namespace {

// Brute-force enumeration of every feasible grid, ranked by log-aspect gap in
// long double with an explicit tie window.
std::pair<std::size_t, std::size_t> oracle_grid(std::size_t h, std::size_t w,
                                                std::size_t lo, std::size_t hi) {
  const long double target = std::log(static_cast<long double>(w) / h);
  std::size_t br = 0, bc = 0;
  long double best = 0;
  for (std::size_t r = 1; r <= hi; ++r) {
    for (std::size_t c = 1; c <= hi; ++c) {
      if (r * c < lo || r * c > hi) continue;
      const long double d = std::fabs(std::log(static_cast<long double>(c) / r) - target);
      bool take = br == 0 || d < best - 1e-12L;
      if (!take && std::fabs(d - best) <= 1e-12L) {
        take = r * c < br * bc || (r * c == br * bc && r < br);
      }
      if (take) {
        best = d;
        br = r;
        bc = c;
      }
    }
  }
  return {br, bc};
}

S2Config single_scale() {
  S2Config c;
  c.scale_factors = {1};
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  S2Config c;
  CHECK_NOTHROW(c.validate());
  c.scale_factors = {2, 3};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.scale_factors = {1, 3, 3};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.scale_factors = {1};
  c.min_tiles_largest_scale = 13;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.min_tiles_largest_scale = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("plan examples") {
  const TilePlan sq = plan_tiles(448, 448, single_scale());
  REQUIRE(sq.scales.size() == 1);
  CHECK(sq.largest().grid_rows == 1);
  CHECK(sq.largest().grid_cols == 1);
  CHECK(sq.largest().resized_height == 448);

  const TilePlan p = plan_tiles(600, 800, S2Config{});
  REQUIRE(p.scales.size() == 3);
  CHECK(p.scales[0].tiles() == 1);
  CHECK(p.scales[1].grid_rows == 2);
  CHECK(p.scales[1].resized_width == 896);
  CHECK(p.largest().grid_rows == 3);
  CHECK(p.largest().grid_cols == 4);
  CHECK(p.largest().resized_height == 1344);
  CHECK(p.largest().resized_width == 1792);
  CHECK(p.total_tiles() == 17);

  const TilePlan strip = plan_tiles(100, 4000, S2Config{});
  CHECK(strip.largest().grid_rows == 1);
  CHECK(strip.largest().grid_cols == 12);
  CHECK(oracle_grid(100, 4000, 1, 12) == std::pair<std::size_t, std::size_t>{1, 12});

  CHECK_THROWS_AS(plan_tiles(0, 10, S2Config{}), InvalidArgument);
}

TEST_CASE("minimum tile count is honoured") {
  S2Config c;
  c.min_tiles_largest_scale = 9;
  const TilePlan p = plan_tiles(448, 448, c);
  CHECK(p.largest().grid_rows == 3);
  CHECK(p.largest().grid_cols == 3);
}

TEST_CASE("plans match the brute-force oracle and invariants") {
  Gen g(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t h = g.integer(1, 4096), w = g.integer(1, 4096);
    S2Config c;
    c.max_tiles_largest_scale = g.integer(1, 16);
    c.min_tiles_largest_scale = g.integer(1, c.max_tiles_largest_scale);
    const TilePlan p = plan_tiles(h, w, c);
    const auto want = oracle_grid(h, w, c.min_tiles_largest_scale, c.max_tiles_largest_scale);
    CHECK(p.largest().grid_rows == want.first);
    CHECK(p.largest().grid_cols == want.second);
    for (std::size_t i = 0; i < p.scales.size(); ++i) {
      const ScalePlan& s = p.scales[i];
      CHECK(s.resized_height == s.grid_rows * c.tile_side);
      CHECK(s.resized_width == s.grid_cols * c.tile_side);
      if (i + 1 < p.scales.size()) {
        CHECK(s.grid_rows == c.scale_factors[i]);
        CHECK(s.grid_cols == c.scale_factors[i]);
      }
    }
    CHECK(p.largest().tiles() >= c.min_tiles_largest_scale);
    CHECK(p.largest().tiles() <= c.max_tiles_largest_scale);
    const TilePlan t = plan_tiles(w, h, c);
    CHECK(t.largest().grid_rows == p.largest().grid_cols);
    CHECK(t.largest().grid_cols == p.largest().grid_rows);
  }
}

TEST_CASE("split tiles partition the resized image") {
  Gen g(4);
  S2Config c;
  c.tile_side = 16;
  c.feature_side = 4;
  const Image img = tokscale::testing::random_image(g, 30, 41);
  const TilePlan p = plan_tiles(30, 41, c);
  for (std::size_t s = 0; s < p.scales.size(); ++s) {
    const auto tiles = split_tiles(img, p, s);
    REQUIRE(tiles.size() == p.scales[s].tiles());
    std::vector<FeatureMap> px;
    for (const auto& t : tiles) {
      CHECK(t.height() == 16);
      CHECK(t.width() == 16);
      px.push_back(t.pixels());
    }
    const FeatureMap resized = interpolate_bilinear(
        img.pixels(), p.scales[s].resized_height, p.scales[s].resized_width);
    CHECK(stitch_features(px, p.scales[s].grid_rows, p.scales[s].grid_cols) == resized);
  }
  CHECK_THROWS_AS(split_tiles(img, p, 3), InvalidArgument);

  const Image sq = tokscale::testing::random_image(g, 448, 448);
  const auto one = split_tiles(sq, plan_tiles(448, 448, single_scale()), 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == sq);
}

TEST_CASE("stitch features placement") {
  std::vector<FeatureMap> tiles;
  for (int v = 0; v < 4; ++v) tiles.push_back(FeatureMap::filled(2, 2, 1, float(v)));
  const FeatureMap m = stitch_features(tiles, 2, 2);
  CHECK(m.at(0, 0, 0) == 0.0f);
  CHECK(m.at(1, 3, 0) == 1.0f);
  CHECK(m.at(3, 0, 0) == 2.0f);
  CHECK(m.at(2, 2, 0) == 3.0f);
  CHECK(stitch_features(std::span(tiles).first(1), 1, 1) == tiles[0]);
  CHECK_THROWS_AS(stitch_features(tiles, 1, 3), InvalidArgument);
  tiles[3] = FeatureMap::filled(2, 3, 1, 0.0f);
  CHECK_THROWS_AS(stitch_features(tiles, 2, 2), InvalidArgument);
}

TEST_CASE("toy encoder anchor channel and determinism") {
  Gen g(6);
  const ToyPatchEncoder enc(16, 4, 5, 99);
  const Image tile = tokscale::testing::random_image(g, 16, 16);
  const FeatureMap f = enc.encode(tile);
  REQUIRE(f.height() == 4);
  REQUIRE(f.channels() == 5);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
          for (std::size_t c = 0; c < 3; ++c) s += tile.pixels().at(4 * i + a, 4 * j + b, c);
        }
      }
      CHECK(f.at(i, j, 0) == doctest::Approx(s / 48.0).epsilon(1e-6));
      for (std::size_t c = 1; c < 5; ++c) CHECK(std::fabs(f.at(i, j, c)) <= 1.0f);
    }
  }
  CHECK(ToyPatchEncoder(16, 4, 5, 99).encode(tile) == f);
  CHECK_FALSE(ToyPatchEncoder(16, 4, 5, 100).encode(tile) == f);
  CHECK_THROWS_AS(enc.encode(tokscale::testing::random_image(g, 8, 8)), InvalidArgument);
  CHECK_THROWS_AS(ToyPatchEncoder(16, 5, 5, 1), InvalidArgument);
}

TEST_CASE("multiscale features shape and anchor channels") {
  Gen g(7);
  S2Config c;
  c.tile_side = 32;
  c.feature_side = 8;
  const ToyPatchEncoder enc(32, 8, 4, 1);
  const Image img = tokscale::testing::random_image(g, 45, 60);
  const FeatureMap m = multiscale_features(img, enc, c);
  const TilePlan p = plan_tiles(45, 60, c);
  CHECK(m.height() == 8 * p.largest().grid_rows);
  CHECK(m.width() == 8 * p.largest().grid_cols);
  CHECK(m.channels() == 12);

  S2Config two = c;
  two.scale_factors = {1, 2};
  const Image gray = Image(FeatureMap::filled(50, 50, 3, 0.4f));
  const FeatureMap k = multiscale_features(gray, enc, two);
  for (std::size_t i = 0; i < k.height(); ++i) {
    for (std::size_t j = 0; j < k.width(); ++j) {
      CHECK(k.at(i, j, 0) == doctest::Approx(0.4).epsilon(1e-6));
      CHECK(k.at(i, j, 4) == k.at(i, j, 0));
    }
  }

  const Image sq = tokscale::testing::random_image(g, 32, 32);
  S2Config one = c;
  one.scale_factors = {1};
  CHECK(multiscale_features(sq, enc, one) == enc.encode(sq));
}

TEST_CASE("multiscale features are thread-count independent") {
  Gen g(8);
  S2Config c;
  c.tile_side = 32;
  c.feature_side = 8;
  const ToyPatchEncoder enc(32, 8, 3, 5);
  const Image img = tokscale::testing::random_image(g, 70, 50);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const FeatureMap serial = multiscale_features(img, enc, c);
  omp_set_num_threads(4);
  const FeatureMap parallel = multiscale_features(img, enc, c);
  omp_set_num_threads(saved);
  CHECK(serial == parallel);
}

TEST_CASE("encoder mismatch is rejected") {
  const ToyPatchEncoder enc(32, 8, 3, 5);
  S2Config c;
  CHECK_THROWS_AS(multiscale_features(Image(FeatureMap(10, 10, 3)), enc, c), InvalidArgument);
}
