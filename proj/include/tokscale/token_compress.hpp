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

// Visual token compression: spatial-to-channel (STC) folding for image
// token grids and temporal group averaging for video token stacks.

#ifndef TOKSCALE_TOKEN_COMPRESS_HPP_
#define TOKSCALE_TOKEN_COMPRESS_HPP_

#include <cstddef>
#include <vector>

#include "tokscale/s2_tiling.hpp"
#include "tokscale/tensor.hpp"

namespace tokscale {

enum class Provenance { kImage, kVideoFrame };

class TokenGrid {
 public:
  explicit TokenGrid(FeatureMap tokens, Provenance provenance = Provenance::kImage,
                     std::size_t k_applied = 1, bool interpolated = false);

  std::size_t rows() const { return tokens_.height(); }
  std::size_t cols() const { return tokens_.width(); }
  std::size_t channels() const { return tokens_.channels(); }
  std::size_t token_count() const { return rows() * cols(); }
  const FeatureMap& tokens() const { return tokens_; }
  Provenance provenance() const { return provenance_; }
  // Block side of the STC fold that produced this grid (1 if none).
  std::size_t k_applied() const { return k_applied_; }
  // True when the source grid was resized up to a multiple of k first.
  bool interpolated() const { return interpolated_; }

  friend bool operator==(const TokenGrid&, const TokenGrid&) = default;

 private:
  FeatureMap tokens_;
  Provenance provenance_;
  std::size_t k_applied_;
  bool interpolated_;
};

class VideoTokenTensor {
 public:
  // Throws InvalidArgument on an empty list or mixed frame shapes.
  explicit VideoTokenTensor(std::vector<TokenGrid> frames);

  std::size_t frames() const { return frames_.size(); }
  const TokenGrid& frame(std::size_t i) const { return frames_[i]; }
  const std::vector<TokenGrid>& all_frames() const { return frames_; }
  std::size_t token_count() const {
    return frames_.size() * frames_.front().token_count();
  }

 private:
  std::vector<TokenGrid> frames_;
};

// Folds each k x k block of cells into the channel axis: output cell (i, j)
// channel block a*k + b holds input cell (i*k + a, j*k + b). When k does not
// divide a side the grid is first bilinearly resized up to the next multiple.
TokenGrid stc_reshape(const TokenGrid& g, std::size_t k);

// Exact inverse of a divisible stc_reshape.
TokenGrid stc_inverse(const TokenGrid& g, std::size_t k);

// STC applied independently to each feature_side x feature_side tile block
// of a merged multi-scale map, then re-stitched, so that every tile yields
// ceil(feature_side / k)^2 tokens.
TokenGrid stc_per_tile(const FeatureMap& merged, std::size_t grid_rows,
                       std::size_t grid_cols, std::size_t k);

// Consecutive groups of `ratio` frames (the last may be short) are replaced
// by their elementwise mean.
VideoTokenTensor temporal_pool(const VideoTokenTensor& v, std::size_t ratio);

struct TokenCount {
  std::size_t tokens_per_tile = 0;  // ceil(feature_side / k)^2
  std::size_t merged_tiles = 0;     // tiles in the largest-scale grid
  std::size_t merged_rows = 0;      // token grid after per-tile STC
  std::size_t merged_cols = 0;
  std::size_t total_tokens = 0;
  std::size_t encoded_tiles = 0;    // tiles run through the encoder, all scales
};

TokenCount count_tokens(const TilePlan& plan, std::size_t k,
                        std::size_t feature_side);

}  // namespace tokscale

#endif  // TOKSCALE_TOKEN_COMPRESS_HPP_
