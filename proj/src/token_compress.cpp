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

#include "tokscale/token_compress.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "tokscale/error.hpp"

namespace tokscale {

namespace {

std::size_t round_up(std::size_t n, std::size_t k) { return (n + k - 1) / k * k; }

}  // namespace

TokenGrid::TokenGrid(FeatureMap tokens, Provenance provenance,
                     std::size_t k_applied, bool interpolated)
    : tokens_(std::move(tokens)),
      provenance_(provenance),
      k_applied_(k_applied),
      interpolated_(interpolated) {}

VideoTokenTensor::VideoTokenTensor(std::vector<TokenGrid> frames)
    : frames_(std::move(frames)) {
  if (frames_.empty()) throw InvalidArgument("video needs at least one frame");
  for (const auto& f : frames_) {
    if (!f.tokens().same_shape(frames_.front().tokens())) {
      throw InvalidArgument("all video frames must share one token grid shape");
    }
  }
}

TokenGrid stc_reshape(const TokenGrid& g, std::size_t k) {
  if (k == 0) throw InvalidArgument("STC block side must be positive");
  if (k == 1) return g;

  const bool resize = g.rows() % k != 0 || g.cols() % k != 0;
  const FeatureMap src =
      resize ? interpolate_bilinear(g.tokens(), round_up(g.rows(), k),
                                    round_up(g.cols(), k))
             : g.tokens();
  const std::size_t ch = src.channels();
  const std::size_t oh = src.height() / k;
  const std::size_t ow = src.width() / k;
  const std::size_t och = ch * k * k;
  std::vector<float> out(oh * ow * och);
  const auto rows = static_cast<std::int64_t>(oh);
#pragma omp parallel for schedule(static)
  for (std::int64_t bi = 0; bi < rows; ++bi) {
    const auto i = static_cast<std::size_t>(bi);
    for (std::size_t j = 0; j < ow; ++j) {
      float* dst = out.data() + (i * ow + j) * och;
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
          const auto cell = src.cell(i * k + a, j * k + b);
          std::copy(cell.begin(), cell.end(), dst + (a * k + b) * ch);
        }
      }
    }
  }
  return TokenGrid(FeatureMap(oh, ow, och, std::move(out)), g.provenance(),
                   g.k_applied() * k, g.interpolated() || resize);
}

TokenGrid stc_inverse(const TokenGrid& g, std::size_t k) {
  if (k == 0) throw InvalidArgument("STC block side must be positive");
  if (k == 1) return g;
  if (g.channels() % (k * k) != 0) {
    throw InvalidArgument("channel count " + std::to_string(g.channels()) +
                          " is not divisible by k^2 = " + std::to_string(k * k));
  }
  const std::size_t ch = g.channels() / (k * k);
  const std::size_t oh = g.rows() * k;
  const std::size_t ow = g.cols() * k;
  std::vector<float> out(oh * ow * ch);
  const auto& src = g.tokens();
  const auto rows = static_cast<std::int64_t>(g.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t bi = 0; bi < rows; ++bi) {
    const auto i = static_cast<std::size_t>(bi);
    for (std::size_t j = 0; j < g.cols(); ++j) {
      const auto cell = src.cell(i, j);
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
          const auto part = cell.subspan((a * k + b) * ch, ch);
          std::copy(part.begin(), part.end(),
                    out.begin() + ((i * k + a) * ow + (j * k + b)) * ch);
        }
      }
    }
  }
  const std::size_t k_left = g.k_applied() % k == 0 ? g.k_applied() / k : 1;
  return TokenGrid(FeatureMap(oh, ow, ch, std::move(out)), g.provenance(),
                   k_left, g.interpolated());
}

TokenGrid stc_per_tile(const FeatureMap& merged, std::size_t grid_rows,
                       std::size_t grid_cols, std::size_t k) {
  if (k == 0) throw InvalidArgument("STC block side must be positive");
  std::vector<FeatureMap> blocks = split_blocks(merged, grid_rows, grid_cols);
  bool resized = false;
  std::vector<FeatureMap> folded;
  folded.reserve(blocks.size());
  for (auto& b : blocks) {
    TokenGrid t = stc_reshape(TokenGrid(std::move(b)), k);
    resized = resized || t.interpolated();
    folded.push_back(t.tokens());
  }
  return TokenGrid(stitch_blocks(folded, grid_rows, grid_cols),
                   Provenance::kImage, k, resized);
}

VideoTokenTensor temporal_pool(const VideoTokenTensor& v, std::size_t ratio) {
  if (ratio == 0) throw InvalidArgument("temporal pool ratio must be positive");
  if (ratio == 1) return v;
  const std::size_t f = v.frames();
  const std::size_t groups = (f + ratio - 1) / ratio;
  const auto& first = v.frame(0).tokens();
  const std::size_t n = first.size();

  std::vector<TokenGrid> pooled;
  pooled.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = g * ratio;
    const std::size_t end = std::min(f, begin + ratio);
    const double inv = 1.0 / static_cast<double>(end - begin);
    std::vector<float> out(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t e = 0; e < count; ++e) {
      const auto idx = static_cast<std::size_t>(e);
      double acc = 0.0;
      for (std::size_t t = begin; t < end; ++t) {
        acc += v.frame(t).tokens().data()[idx];
      }
      out[idx] = static_cast<float>(acc * inv);
    }
    pooled.emplace_back(FeatureMap(first.height(), first.width(),
                                   first.channels(), std::move(out)),
                        Provenance::kVideoFrame, v.frame(0).k_applied(),
                        v.frame(0).interpolated());
  }
  return VideoTokenTensor(std::move(pooled));
}

TokenCount count_tokens(const TilePlan& plan, std::size_t k,
                        std::size_t feature_side) {
  if (k == 0) throw InvalidArgument("STC block side must be positive");
  if (feature_side == 0) throw InvalidArgument("feature_side must be positive");
  TokenCount c;
  const std::size_t side = round_up(feature_side, k) / k;
  c.tokens_per_tile = side * side;
  c.merged_tiles = plan.largest().tiles();
  c.merged_rows = plan.largest().grid_rows * side;
  c.merged_cols = plan.largest().grid_cols * side;
  c.total_tokens = c.tokens_per_tile * c.merged_tiles;
  c.encoded_tiles = plan.total_tiles();
  return c;
}

}  // namespace tokscale
