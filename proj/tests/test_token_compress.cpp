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
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "tokscale/error.hpp"
#include "tokscale/token_compress.hpp"

using namespace tokscale;
using tokscale::testing::Gen;
using tokscale::testing::random_map;

namespace {

VideoTokenTensor random_video(Gen& g, std::size_t frames, std::size_t side,
                              std::size_t ch = 1) {
  std::vector<TokenGrid> f;
  for (std::size_t i = 0; i < frames; ++i) {
    f.emplace_back(random_map(g, side, side, ch), Provenance::kVideoFrame);
  }
  return VideoTokenTensor(std::move(f));
}

std::vector<float> sorted(std::span<const float> v) {
  std::vector<float> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

TEST_CASE("STC token counts") {
  Gen g(1);
  const TokenGrid grid(random_map(g, 32, 32, 2));
  const TokenGrid k2 = stc_reshape(grid, 2);
  CHECK(k2.rows() == 16);
  CHECK(k2.cols() == 16);
  CHECK(k2.channels() == 8);
  CHECK(k2.token_count() == 256);
  CHECK(k2.k_applied() == 2);
  CHECK_FALSE(k2.interpolated());

  const TokenGrid k3 = stc_reshape(grid, 3);
  CHECK(k3.rows() == 11);
  CHECK(k3.cols() == 11);
  CHECK(k3.channels() == 18);
  CHECK(k3.token_count() == 121);
  CHECK(k3.interpolated());

  CHECK(stc_reshape(grid, 1) == grid);
  CHECK(stc_reshape(grid, 32).token_count() == 1);
  CHECK_THROWS_AS(stc_reshape(grid, 0), InvalidArgument);
}

TEST_CASE("STC fold layout") {
  Gen g(2);
  const std::size_t k = 3, c = 2;
  const FeatureMap src = random_map(g, 6, 9, c);
  const TokenGrid out = stc_reshape(TokenGrid(src), k);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
          for (std::size_t e = 0; e < c; ++e) {
            CHECK(out.tokens().at(i, j, (a * k + b) * c + e) ==
                  src.at(i * k + a, j * k + b, e));
          }
        }
      }
    }
  }
}

TEST_CASE("non-divisible STC interpolates first") {
  Gen g(3);
  const FeatureMap src = random_map(g, 32, 32, 1);
  const TokenGrid out = stc_reshape(TokenGrid(src), 3);
  const FeatureMap up = interpolate_bilinear(src, 33, 33);
  CHECK(stc_inverse(out, 3).tokens() == up);
}

TEST_CASE("STC inverse round trip") {
  Gen g(4);
  const TokenGrid grid(random_map(g, 30, 30, 5));
  const TokenGrid folded = stc_reshape(grid, 5);
  CHECK(stc_inverse(folded, 5).tokens() == grid.tokens());
  CHECK(stc_inverse(grid, 1) == grid);
  CHECK(sorted(folded.tokens().data()) == sorted(grid.tokens().data()));
  CHECK_THROWS_AS(stc_inverse(TokenGrid(random_map(g, 2, 2, 3)), 2), InvalidArgument);
  CHECK_THROWS_AS(stc_inverse(grid, 0), InvalidArgument);

  const TokenGrid back = stc_inverse(stc_reshape(TokenGrid(random_map(g, 32, 32, 1)), 2), 2);
  CHECK(back.rows() == 32);
}

TEST_CASE("per-tile STC") {
  Gen g(5);
  const FeatureMap merged = random_map(g, 96, 128, 2);
  const TokenGrid t = stc_per_tile(merged, 3, 4, 3);
  CHECK(t.rows() == 33);
  CHECK(t.cols() == 44);
  CHECK(t.token_count() == 12 * 121);
  CHECK(t.interpolated());
  const auto blocks = split_blocks(merged, 3, 4);
  const TokenGrid b5 = stc_reshape(TokenGrid(blocks[5]), 3);
  for (std::size_t i = 0; i < 11; ++i) {
    for (std::size_t j = 0; j < 11; ++j) {
      for (std::size_t c = 0; c < t.channels(); ++c) {
        CHECK(t.tokens().at(11 + i, 11 + j, c) == b5.tokens().at(i, j, c));
      }
    }
  }
  CHECK(stc_per_tile(merged, 3, 4, 2).token_count() == 12 * 256);
}

TEST_CASE("video tensor validation") {
  const std::vector<TokenGrid> none;
  CHECK_THROWS_AS(VideoTokenTensor{none}, InvalidArgument);
  std::vector<TokenGrid> mixed = {TokenGrid(FeatureMap(2, 2, 1)), TokenGrid(FeatureMap(2, 3, 1))};
  CHECK_THROWS_AS(VideoTokenTensor{mixed}, InvalidArgument);
}

TEST_CASE("temporal pool budgets") {
  Gen g(6);
  struct Case {
    std::size_t frames, ratio, tokens;
  };
  for (const Case& c : {Case{8, 1, 2048}, Case{32, 1, 8192}, Case{32, 4, 2048},
                        Case{256, 8, 8192}}) {
    const VideoTokenTensor v = random_video(g, c.frames, 16);
    const VideoTokenTensor p = temporal_pool(v, c.ratio);
    CHECK(p.token_count() == c.tokens);
    CHECK(p.frames() == (c.frames + c.ratio - 1) / c.ratio);
  }
  CHECK_THROWS_AS(temporal_pool(random_video(g, 2, 4), 0), InvalidArgument);
}

TEST_CASE("temporal pool values") {
  Gen g(7);
  const VideoTokenTensor v = random_video(g, 5, 4, 2);
  const VideoTokenTensor id = temporal_pool(v, 1);
  for (std::size_t f = 0; f < 5; ++f) CHECK(id.frame(f) == v.frame(f));

  const VideoTokenTensor all = temporal_pool(v, 5);
  REQUIRE(all.frames() == 1);
  const VideoTokenTensor ragged = temporal_pool(v, 2);
  REQUIRE(ragged.frames() == 3);
  CHECK(ragged.frame(2).tokens() == v.frame(4).tokens());
  for (std::size_t e = 0; e < v.frame(0).tokens().size(); ++e) {
    double s = 0.0;
    for (std::size_t f = 0; f < 5; ++f) s += v.frame(f).tokens().data()[e];
    CHECK(all.frame(0).tokens().data()[e] == doctest::Approx(s / 5).epsilon(1e-6));
    const double pair = (double(v.frame(2).tokens().data()[e]) + v.frame(3).tokens().data()[e]) / 2;
    CHECK(ragged.frame(1).tokens().data()[e] == doctest::Approx(pair).epsilon(1e-6));
  }
}

TEST_CASE("temporal pool preserves the global mean when the ratio divides") {
  Gen g(8);
  const VideoTokenTensor v = random_video(g, 12, 5, 3);
  auto global_mean = [](const VideoTokenTensor& t) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& f : t.all_frames()) {
      for (float x : f.tokens().data()) {
        s += x;
        ++n;
      }
    }
    return s / n;
  };
  for (std::size_t r : {1, 2, 3, 4, 6, 12}) {
    CHECK(global_mean(temporal_pool(v, r)) == doctest::Approx(global_mean(v)).epsilon(1e-6));
  }
}

TEST_CASE("token counting follows the plan") {
  const TilePlan p = plan_tiles(600, 800, S2Config{});
  const TokenCount k3 = count_tokens(p, 3, 32);
  CHECK(k3.tokens_per_tile == 121);
  CHECK(k3.merged_tiles == 12);
  CHECK(k3.total_tokens == 1452);
  CHECK(k3.merged_rows == 33);
  CHECK(k3.merged_cols == 44);
  CHECK(k3.encoded_tiles == 17);
  const TokenCount k2 = count_tokens(p, 2, 32);
  CHECK(k2.tokens_per_tile == 256);
  CHECK(k2.total_tokens == 3072);
  CHECK(count_tokens(p, 32, 32).tokens_per_tile == 1);
  CHECK(count_tokens(p, 1, 32).total_tokens == 12 * 1024);

  Gen g(9);
  for (std::size_t k = 1; k <= 8; ++k) {
    const TokenGrid t = stc_per_tile(random_map(g, 96, 128, 1), 3, 4, k);
    CHECK(t.token_count() == count_tokens(p, k, 32).total_tokens);
  }
}
