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

// Multi-scale tiled feature extraction with an aspect-adaptive largest scale.
//
// Every scale but the last is resized to an s x s grid of square tiles. The
// largest scale picks the tile grid whose aspect ratio is closest (in log
// space) to the image, within [min_tiles, max_tiles]. Tiles are encoded
// independently, stitched per scale, resized to the largest scale's feature
// size and concatenated along channels, smallest scale first.

#ifndef TOKSCALE_S2_TILING_HPP_
#define TOKSCALE_S2_TILING_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "tokscale/tensor.hpp"

namespace tokscale {

struct S2Config {
  std::size_t tile_side = 448;
  std::vector<std::size_t> scale_factors = {1, 2, 3};
  std::size_t max_tiles_largest_scale = 12;
  std::size_t min_tiles_largest_scale = 1;
  std::size_t feature_side = 32;

  // Throws InvalidArgument when an invariant is broken.
  void validate() const;
};

struct ScalePlan {
  std::size_t scale_factor = 0;
  std::size_t resized_height = 0;
  std::size_t resized_width = 0;
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;

  std::size_t tiles() const { return grid_rows * grid_cols; }
  friend bool operator==(const ScalePlan&, const ScalePlan&) = default;
};

struct TilePlan {
  S2Config config;
  std::size_t image_height = 0;
  std::size_t image_width = 0;
  std::vector<ScalePlan> scales;  // ascending scale order

  const ScalePlan& largest() const { return scales.back(); }
  std::size_t total_tiles() const;
};

TilePlan plan_tiles(std::size_t image_h, std::size_t image_w,
                    const S2Config& cfg);

std::vector<Image> split_tiles(const Image& img, const TilePlan& plan,
                               std::size_t scale_index);

std::vector<FeatureMap> split_tile_features(const FeatureMap& m,
                                            std::size_t grid_rows,
                                            std::size_t grid_cols);
FeatureMap stitch_features(std::span<const FeatureMap> tiles,
                           std::size_t grid_rows, std::size_t grid_cols);

// Maps a tile_side x tile_side tile to a feature_side x feature_side x
// channels() grid. Implementations must be deterministic and safe to call
// concurrently from several threads.
class TileEncoder {
 public:
  virtual ~TileEncoder() = default;
  virtual std::size_t tile_side() const = 0;
  virtual std::size_t feature_side() const = 0;
  virtual std::size_t channels() const = 0;
  virtual FeatureMap encode(const Image& tile) const = 0;
};

// Patchify-and-project stand-in for a vision tower. Each feature cell covers
// a (tile_side / feature_side)^2 pixel patch. Channel 0 is the patch's mean
// intensity; the remaining channels are tanh of fixed seeded random
// projections of the mean-removed patch.
class ToyPatchEncoder final : public TileEncoder {
 public:
  ToyPatchEncoder(std::size_t tile_side, std::size_t feature_side,
                  std::size_t channels, std::uint64_t seed,
                  std::size_t image_channels = 3);

  std::size_t tile_side() const override { return tile_side_; }
  std::size_t feature_side() const override { return feature_side_; }
  std::size_t channels() const override { return channels_; }
  FeatureMap encode(const Image& tile) const override;

 private:
  std::size_t tile_side_;
  std::size_t feature_side_;
  std::size_t channels_;
  std::size_t image_channels_;
  std::size_t patch_;
  // (channels - 1) x (patch * patch * image_channels), row-major.
  std::vector<float> weights_;
};

// Tiles, encodes (tiles in parallel), stitches and merges all scales.
FeatureMap multiscale_features(const Image& img, const TileEncoder& enc,
                               const S2Config& cfg);
FeatureMap multiscale_features(const Image& img, const TileEncoder& enc,
                               const TilePlan& plan);

}  // namespace tokscale

#endif  // TOKSCALE_S2_TILING_HPP_
