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

#ifndef TOKSCALE_TENSOR_HPP_
#define TOKSCALE_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace tokscale {

// Dense height x width x channels grid of finite floats, stored row-major in
// (row, column, channel) order. Immutable once constructed.
class FeatureMap {
 public:
  // All-zero map.
  FeatureMap(std::size_t height, std::size_t width, std::size_t channels);
  // Takes ownership of `data`; throws InvalidArgument on a size mismatch,
  // a zero dimension or any non-finite value.
  FeatureMap(std::size_t height, std::size_t width, std::size_t channels,
             std::vector<float> data);

  static FeatureMap filled(std::size_t height, std::size_t width,
                           std::size_t channels, float value);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  float at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[(row * width_ + col) * channels_ + ch];
  }
  std::span<const float> data() const { return data_; }
  // Channels of one cell.
  std::span<const float> cell(std::size_t row, std::size_t col) const {
    return std::span<const float>(data_).subspan(
        (row * width_ + col) * channels_, channels_);
  }

  bool same_shape(const FeatureMap& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }
  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::size_t channels_;
  std::vector<float> data_;
};

// Pixel grid with 1 or 3 channels and values in [0, 1].
class Image {
 public:
  Image(std::size_t height, std::size_t width, std::size_t channels,
        std::vector<float> data);
  explicit Image(FeatureMap pixels);

  std::size_t height() const { return pixels_.height(); }
  std::size_t width() const { return pixels_.width(); }
  std::size_t channels() const { return pixels_.channels(); }
  const FeatureMap& pixels() const { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  FeatureMap pixels_;
};

// Bilinear resize with half-pixel (align_corners = false) sampling; source
// coordinates are clamped to the border. Same-size resize returns a copy.
FeatureMap interpolate_bilinear(const FeatureMap& src, std::size_t out_h,
                                std::size_t out_w);
Image resize_image(const Image& img, std::size_t out_h, std::size_t out_w);

// Mean over non-overlapping block_h x block_w windows.
FeatureMap block_average(const FeatureMap& src, std::size_t block_h,
                         std::size_t block_w);

// Repeats every cell factor_h x factor_w times.
FeatureMap upsample_nearest(const FeatureMap& src, std::size_t factor_h,
                            std::size_t factor_w);

FeatureMap concat_channels(std::span<const FeatureMap> maps);
FeatureMap slice_channels(const FeatureMap& src, std::size_t begin,
                          std::size_t count);

// Cuts `src` into rows x cols equal blocks, returned in row-major order.
std::vector<FeatureMap> split_blocks(const FeatureMap& src, std::size_t rows,
                                     std::size_t cols);
// Inverse of split_blocks; every block must share one shape.
FeatureMap stitch_blocks(std::span<const FeatureMap> blocks, std::size_t rows,
                         std::size_t cols);

// Value mean accumulated in double.
double mean_value(const FeatureMap& m);

}  // namespace tokscale

#endif  // TOKSCALE_TENSOR_HPP_
