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

#include "tokscale/s2_tiling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <string>

#include "rng.hpp"
#include "tokscale/error.hpp"

namespace tokscale {

void S2Config::validate() const {
  if (tile_side == 0) throw InvalidArgument("tile_side must be positive");
  if (feature_side == 0) throw InvalidArgument("feature_side must be positive");
  if (scale_factors.empty() || scale_factors.front() != 1) {
    throw InvalidArgument("scale_factors must start at 1");
  }
  for (std::size_t i = 1; i < scale_factors.size(); ++i) {
    if (scale_factors[i] <= scale_factors[i - 1]) {
      throw InvalidArgument("scale_factors must be strictly increasing");
    }
  }
  if (min_tiles_largest_scale < 1 ||
      min_tiles_largest_scale > max_tiles_largest_scale) {
    throw InvalidArgument(
        "need 1 <= min_tiles_largest_scale <= max_tiles_largest_scale");
  }
}

std::size_t TilePlan::total_tiles() const {
  std::size_t n = 0;
  for (const auto& s : scales) n += s.tiles();
  return n;
}

namespace {

__extension__ typedef unsigned __int128 u128;

// |ln(cols/rows) - ln(w/h)| = ln(hi/lo) with hi = max(cols*h, rows*w) and
// lo = min(...). Kept as an exact fraction so that comparisons are free of
// rounding and symmetric under transposition.
struct AspectGap {
  u128 hi;
  u128 lo;
};

AspectGap aspect_gap(std::size_t rows, std::size_t cols, std::size_t h,
                     std::size_t w) {
  const u128 a = static_cast<u128>(cols) * h;
  const u128 b = static_cast<u128>(rows) * w;
  return a >= b ? AspectGap{a, b} : AspectGap{b, a};
}

// Three-way compare of hi1/lo1 against hi2/lo2. Products stay below 2^128
// for grid sides and image sides under 2^32.
int compare_gap(const AspectGap& x, const AspectGap& y) {
  const u128 l = x.hi * y.lo;
  const u128 r = y.hi * x.lo;
  return l < r ? -1 : (l > r ? 1 : 0);
}

}  // namespace

TilePlan plan_tiles(std::size_t image_h, std::size_t image_w,
                    const S2Config& cfg) {
  cfg.validate();
  if (image_h == 0 || image_w == 0) {
    throw InvalidArgument("image dimensions must be positive");
  }
  TilePlan plan;
  plan.config = cfg;
  plan.image_height = image_h;
  plan.image_width = image_w;

  const std::size_t t = cfg.tile_side;
  for (std::size_t i = 0; i + 1 < cfg.scale_factors.size(); ++i) {
    const std::size_t s = cfg.scale_factors[i];
    plan.scales.push_back({s, s * t, s * t, s, s});
  }

  std::size_t best_r = 0, best_c = 0;
  AspectGap best{};
  for (std::size_t r = 1; r <= cfg.max_tiles_largest_scale; ++r) {
    for (std::size_t c = 1; r * c <= cfg.max_tiles_largest_scale; ++c) {
      if (r * c < cfg.min_tiles_largest_scale) continue;
      const AspectGap gap = aspect_gap(r, c, image_h, image_w);
      bool take = best_r == 0;
      if (!take) {
        const int cmp = compare_gap(gap, best);
        take = cmp < 0 || (cmp == 0 && (r * c < best_r * best_c ||
                                        (r * c == best_r * best_c && r < best_r)));
      }
      if (take) {
        best = gap;
        best_r = r;
        best_c = c;
      }
    }
  }
  plan.scales.push_back(
      {cfg.scale_factors.back(), best_r * t, best_c * t, best_r, best_c});
  return plan;
}

std::vector<Image> split_tiles(const Image& img, const TilePlan& plan,
                               std::size_t scale_index) {
  if (scale_index >= plan.scales.size()) {
    throw InvalidArgument("scale index " + std::to_string(scale_index) +
                          " out of range for a " +
                          std::to_string(plan.scales.size()) + "-scale plan");
  }
  const ScalePlan& s = plan.scales[scale_index];
  const FeatureMap resized =
      interpolate_bilinear(img.pixels(), s.resized_height, s.resized_width);
  std::vector<Image> tiles;
  tiles.reserve(s.tiles());
  for (auto& block : split_blocks(resized, s.grid_rows, s.grid_cols)) {
    tiles.emplace_back(std::move(block));
  }
  return tiles;
}

std::vector<FeatureMap> split_tile_features(const FeatureMap& m,
                                            std::size_t grid_rows,
                                            std::size_t grid_cols) {
  return split_blocks(m, grid_rows, grid_cols);
}

FeatureMap stitch_features(std::span<const FeatureMap> tiles,
                           std::size_t grid_rows, std::size_t grid_cols) {
  return stitch_blocks(tiles, grid_rows, grid_cols);
}

ToyPatchEncoder::ToyPatchEncoder(std::size_t tile_side,
                                 std::size_t feature_side, std::size_t channels,
                                 std::uint64_t seed, std::size_t image_channels)
    : tile_side_(tile_side),
      feature_side_(feature_side),
      channels_(channels),
      image_channels_(image_channels),
      patch_(feature_side == 0 ? 0 : tile_side / feature_side) {
  if (feature_side == 0 || tile_side == 0 || tile_side % feature_side != 0) {
    throw InvalidArgument("feature_side must divide tile_side");
  }
  if (channels == 0) throw InvalidArgument("encoder needs at least 1 channel");
  if (image_channels != 1 && image_channels != 3) {
    throw InvalidArgument("encoder input must have 1 or 3 channels");
  }
  const std::size_t fan_in = patch_ * patch_ * image_channels_;
  const double amp = std::sqrt(3.0 / static_cast<double>(fan_in));
  detail::Rng rng(seed);
  weights_.resize((channels_ - 1) * fan_in);
  for (auto& w : weights_) {
    w = static_cast<float>((2.0 * rng.uniform() - 1.0) * amp);
  }
}

FeatureMap ToyPatchEncoder::encode(const Image& tile) const {
  if (tile.height() != tile_side_ || tile.width() != tile_side_ ||
      tile.channels() != image_channels_) {
    throw InvalidArgument("encoder expects a " + std::to_string(tile_side_) +
                          "x" + std::to_string(tile_side_) + "x" +
                          std::to_string(image_channels_) + " tile");
  }
  const auto& px = tile.pixels();
  const std::size_t fan_in = patch_ * patch_ * image_channels_;
  std::vector<float> out(feature_side_ * feature_side_ * channels_);
  std::vector<double> patch(fan_in);
  for (std::size_t fi = 0; fi < feature_side_; ++fi) {
    for (std::size_t fj = 0; fj < feature_side_; ++fj) {
      double sum = 0.0;
      std::size_t k = 0;
      for (std::size_t a = 0; a < patch_; ++a) {
        const auto line = px.data().subspan(
            ((fi * patch_ + a) * tile_side_ + fj * patch_) * image_channels_,
            patch_ * image_channels_);
        for (float v : line) {
          patch[k++] = v;
          sum += v;
        }
      }
      const double mean = sum / static_cast<double>(fan_in);
      float* cell = out.data() + (fi * feature_side_ + fj) * channels_;
      cell[0] = static_cast<float>(mean);
      for (std::size_t c = 1; c < channels_; ++c) {
        const float* w = weights_.data() + (c - 1) * fan_in;
        double acc = 0.0;
        for (std::size_t i = 0; i < fan_in; ++i) acc += w[i] * (patch[i] - mean);
        cell[c] = static_cast<float>(std::tanh(acc));
      }
    }
  }
  return FeatureMap(feature_side_, feature_side_, channels_, std::move(out));
}

FeatureMap multiscale_features(const Image& img, const TileEncoder& enc,
                               const S2Config& cfg) {
  return multiscale_features(img, enc, plan_tiles(img.height(), img.width(), cfg));
}

FeatureMap multiscale_features(const Image& img, const TileEncoder& enc,
                               const TilePlan& plan) {
  if (enc.tile_side() != plan.config.tile_side ||
      enc.feature_side() != plan.config.feature_side) {
    throw InvalidArgument("encoder geometry does not match the tile plan");
  }
  const std::size_t f = enc.feature_side();
  const std::size_t out_h = plan.largest().grid_rows * f;
  const std::size_t out_w = plan.largest().grid_cols * f;

  std::vector<FeatureMap> per_scale;
  per_scale.reserve(plan.scales.size());
  for (std::size_t si = 0; si < plan.scales.size(); ++si) {
    const std::vector<Image> tiles = split_tiles(img, plan, si);
    std::vector<std::optional<FeatureMap>> slots(tiles.size());
    std::exception_ptr failure;
    const auto n = static_cast<std::int64_t>(tiles.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        slots[static_cast<std::size_t>(i)].emplace(
            enc.encode(tiles[static_cast<std::size_t>(i)]));
      } catch (...) {
#pragma omp critical(tokscale_encode_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<FeatureMap> encoded;
    encoded.reserve(slots.size());
    for (auto& s : slots) {
      if (s->height() != f || s->width() != f ||
          s->channels() != enc.channels()) {
        throw InvalidArgument("encoder returned a mis-shaped feature map");
      }
      encoded.push_back(std::move(*s));
    }
    const ScalePlan& sp = plan.scales[si];
    per_scale.push_back(interpolate_bilinear(
        stitch_features(encoded, sp.grid_rows, sp.grid_cols), out_h, out_w));
  }
  return concat_channels(per_scale);
}

}  // namespace tokscale
