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

#include "tokscale/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "sampling.hpp"
#include "tokscale/error.hpp"

namespace tokscale {

namespace {

void check_dims(std::size_t h, std::size_t w, std::size_t c) {
  if (h == 0 || w == 0 || c == 0) {
    throw InvalidArgument("feature map dimensions must be positive, got " +
                          std::to_string(h) + "x" + std::to_string(w) + "x" +
                          std::to_string(c));
  }
}

}  // namespace

FeatureMap::FeatureMap(std::size_t height, std::size_t width,
                       std::size_t channels)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width, channels);
  data_.assign(height * width * channels, 0.0f);
}

FeatureMap::FeatureMap(std::size_t height, std::size_t width,
                       std::size_t channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels),
      data_(std::move(data)) {
  check_dims(height, width, channels);
  if (data_.size() != height * width * channels) {
    throw InvalidArgument("feature map data length " +
                          std::to_string(data_.size()) + " != " +
                          std::to_string(height * width * channels));
  }
  for (float v : data_) {
    if (!std::isfinite(v)) {
      throw InvalidArgument("feature map values must be finite");
    }
  }
}

FeatureMap FeatureMap::filled(std::size_t height, std::size_t width,
                              std::size_t channels, float value) {
  return FeatureMap(height, width, channels,
                    std::vector<float>(height * width * channels, value));
}

Image::Image(std::size_t height, std::size_t width, std::size_t channels,
             std::vector<float> data)
    : Image(FeatureMap(height, width, channels, std::move(data))) {}

Image::Image(FeatureMap pixels) : pixels_(std::move(pixels)) {
  if (pixels_.channels() != 1 && pixels_.channels() != 3) {
    throw InvalidArgument("image must have 1 or 3 channels, got " +
                          std::to_string(pixels_.channels()));
  }
  for (float v : pixels_.data()) {
    if (v < 0.0f || v > 1.0f) {
      throw InvalidArgument("image values must lie in [0, 1]");
    }
  }
}

FeatureMap interpolate_bilinear(const FeatureMap& src, std::size_t out_h,
                                std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw InvalidArgument("interpolation target must be non-empty");
  }
  if (out_h == src.height() && out_w == src.width()) return src;

  const std::size_t ch = src.channels();
  std::vector<detail::AxisSample> ys(out_h), xs(out_w);
  for (std::size_t i = 0; i < out_h; ++i) {
    ys[i] = detail::sample_axis(i, src.height(), out_h);
  }
  for (std::size_t j = 0; j < out_w; ++j) {
    xs[j] = detail::sample_axis(j, src.width(), out_w);
  }

  std::vector<float> out(out_h * out_w * ch);
  const auto in = src.data();
  const std::size_t in_w = src.width();
  const auto rows = static_cast<std::int64_t>(out_h);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto& y = ys[static_cast<std::size_t>(i)];
    const float* r0 = in.data() + y.lo * in_w * ch;
    const float* r1 = in.data() + y.hi * in_w * ch;
    float* dst = out.data() + static_cast<std::size_t>(i) * out_w * ch;
    for (std::size_t j = 0; j < out_w; ++j) {
      const auto& x = xs[j];
      for (std::size_t c = 0; c < ch; ++c) {
        dst[j * ch + c] =
            detail::blend(r0[x.lo * ch + c], r0[x.hi * ch + c],
                          r1[x.lo * ch + c], r1[x.hi * ch + c], y.frac, x.frac);
      }
    }
  }
  return FeatureMap(out_h, out_w, ch, std::move(out));
}

Image resize_image(const Image& img, std::size_t out_h, std::size_t out_w) {
  return Image(interpolate_bilinear(img.pixels(), out_h, out_w));
}

FeatureMap block_average(const FeatureMap& src, std::size_t block_h,
                         std::size_t block_w) {
  if (block_h == 0 || block_w == 0 || src.height() % block_h != 0 ||
      src.width() % block_w != 0) {
    throw InvalidArgument("block " + std::to_string(block_h) + "x" +
                          std::to_string(block_w) + " does not tile " +
                          std::to_string(src.height()) + "x" +
                          std::to_string(src.width()));
  }
  const std::size_t oh = src.height() / block_h;
  const std::size_t ow = src.width() / block_w;
  const std::size_t ch = src.channels();
  const double inv = 1.0 / static_cast<double>(block_h * block_w);
  std::vector<float> out(oh * ow * ch);
  const auto rows = static_cast<std::int64_t>(oh);
#pragma omp parallel for schedule(static)
  for (std::int64_t bi = 0; bi < rows; ++bi) {
    const auto i = static_cast<std::size_t>(bi);
    for (std::size_t j = 0; j < ow; ++j) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t a = 0; a < block_h; ++a) {
          for (std::size_t b = 0; b < block_w; ++b) {
            acc += src.at(i * block_h + a, j * block_w + b, c);
          }
        }
        out[(i * ow + j) * ch + c] = static_cast<float>(acc * inv);
      }
    }
  }
  return FeatureMap(oh, ow, ch, std::move(out));
}

FeatureMap upsample_nearest(const FeatureMap& src, std::size_t factor_h,
                            std::size_t factor_w) {
  if (factor_h == 0 || factor_w == 0) {
    throw InvalidArgument("upsample factors must be positive");
  }
  const std::size_t oh = src.height() * factor_h;
  const std::size_t ow = src.width() * factor_w;
  const std::size_t ch = src.channels();
  std::vector<float> out(oh * ow * ch);
  for (std::size_t i = 0; i < oh; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      const auto cell = src.cell(i / factor_h, j / factor_w);
      std::copy(cell.begin(), cell.end(), out.begin() + (i * ow + j) * ch);
    }
  }
  return FeatureMap(oh, ow, ch, std::move(out));
}

FeatureMap concat_channels(std::span<const FeatureMap> maps) {
  if (maps.empty()) throw InvalidArgument("concat_channels: empty list");
  const std::size_t h = maps.front().height();
  const std::size_t w = maps.front().width();
  std::size_t total = 0;
  for (const auto& m : maps) {
    if (m.height() != h || m.width() != w) {
      throw InvalidArgument("concat_channels: spatial shape mismatch");
    }
    total += m.channels();
  }
  std::vector<float> out(h * w * total);
  for (std::size_t p = 0; p < h * w; ++p) {
    float* dst = out.data() + p * total;
    for (const auto& m : maps) {
      const auto src = m.data().subspan(p * m.channels(), m.channels());
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return FeatureMap(h, w, total, std::move(out));
}

FeatureMap slice_channels(const FeatureMap& src, std::size_t begin,
                          std::size_t count) {
  if (count == 0 || begin + count > src.channels()) {
    throw InvalidArgument("slice_channels: range out of bounds");
  }
  const std::size_t cells = src.height() * src.width();
  std::vector<float> out(cells * count);
  for (std::size_t p = 0; p < cells; ++p) {
    const auto s = src.data().subspan(p * src.channels() + begin, count);
    std::copy(s.begin(), s.end(), out.begin() + p * count);
  }
  return FeatureMap(src.height(), src.width(), count, std::move(out));
}

std::vector<FeatureMap> split_blocks(const FeatureMap& src, std::size_t rows,
                                     std::size_t cols) {
  if (rows == 0 || cols == 0 || src.height() % rows != 0 ||
      src.width() % cols != 0) {
    throw InvalidArgument("split_blocks: grid does not divide the map");
  }
  const std::size_t bh = src.height() / rows;
  const std::size_t bw = src.width() / cols;
  const std::size_t ch = src.channels();
  std::vector<FeatureMap> blocks;
  blocks.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::vector<float> data(bh * bw * ch);
      for (std::size_t i = 0; i < bh; ++i) {
        const auto line =
            src.data().subspan(((r * bh + i) * src.width() + c * bw) * ch, bw * ch);
        std::copy(line.begin(), line.end(), data.begin() + i * bw * ch);
      }
      blocks.emplace_back(bh, bw, ch, std::move(data));
    }
  }
  return blocks;
}

FeatureMap stitch_blocks(std::span<const FeatureMap> blocks, std::size_t rows,
                         std::size_t cols) {
  if (rows == 0 || cols == 0 || blocks.size() != rows * cols) {
    throw InvalidArgument("stitch: expected " + std::to_string(rows * cols) +
                          " blocks, got " + std::to_string(blocks.size()));
  }
  const auto& first = blocks.front();
  for (const auto& b : blocks) {
    if (!b.same_shape(first)) {
      throw InvalidArgument("stitch: blocks must share one shape");
    }
  }
  const std::size_t bh = first.height();
  const std::size_t bw = first.width();
  const std::size_t ch = first.channels();
  const std::size_t ow = cols * bw;
  std::vector<float> out(rows * bh * ow * ch);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& b = blocks[r * cols + c];
      for (std::size_t i = 0; i < bh; ++i) {
        const auto line = b.data().subspan(i * bw * ch, bw * ch);
        std::copy(line.begin(), line.end(),
                  out.begin() + ((r * bh + i) * ow + c * bw) * ch);
      }
    }
  }
  return FeatureMap(rows * bh, ow, ch, std::move(out));
}

double mean_value(const FeatureMap& m) {
  double acc = 0.0;
  for (float v : m.data()) acc += v;
  return acc / static_cast<double>(m.size());
}

}  // namespace tokscale
