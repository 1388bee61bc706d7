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

#include "tokscale/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sampling.hpp"
#include "tokscale/error.hpp"

namespace tokscale::reference {

FeatureMap interpolate_bilinear(const FeatureMap& src, std::size_t out_h,
                                std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw InvalidArgument("interpolation target must be non-empty");
  }
  if (out_h == src.height() && out_w == src.width()) return src;
  const std::size_t ch = src.channels();
  std::vector<float> out(out_h * out_w * ch);
  for (std::size_t i = 0; i < out_h; ++i) {
    const auto y = detail::sample_axis(i, src.height(), out_h);
    for (std::size_t j = 0; j < out_w; ++j) {
      const auto x = detail::sample_axis(j, src.width(), out_w);
      for (std::size_t c = 0; c < ch; ++c) {
        out[(i * out_w + j) * ch + c] =
            detail::blend(src.at(y.lo, x.lo, c), src.at(y.lo, x.hi, c),
                          src.at(y.hi, x.lo, c), src.at(y.hi, x.hi, c), y.frac, x.frac);
      }
    }
  }
  return FeatureMap(out_h, out_w, ch, std::move(out));
}

FeatureMap block_average(const FeatureMap& src, std::size_t block_h,
                         std::size_t block_w) {
  if (block_h == 0 || block_w == 0 || src.height() % block_h != 0 ||
      src.width() % block_w != 0) {
    throw InvalidArgument("block does not tile the map");
  }
  const std::size_t oh = src.height() / block_h;
  const std::size_t ow = src.width() / block_w;
  const std::size_t ch = src.channels();
  const double inv = 1.0 / static_cast<double>(block_h * block_w);
  std::vector<float> out(oh * ow * ch);
  for (std::size_t i = 0; i < oh; ++i) {
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

TokenGrid stc_reshape(const TokenGrid& g, std::size_t k) {
  if (k == 0) throw InvalidArgument("STC block side must be positive");
  if (k == 1) return g;
  const bool resize = g.rows() % k != 0 || g.cols() % k != 0;
  const FeatureMap src =
      resize ? reference::interpolate_bilinear(g.tokens(), (g.rows() + k - 1) / k * k,
                                               (g.cols() + k - 1) / k * k)
             : g.tokens();
  const std::size_t ch = src.channels();
  const std::size_t oh = src.height() / k;
  const std::size_t ow = src.width() / k;
  const std::size_t och = ch * k * k;
  std::vector<float> out(oh * ow * och);
  for (std::size_t r = 0; r < src.height(); ++r) {
    for (std::size_t c = 0; c < src.width(); ++c) {
      for (std::size_t e = 0; e < ch; ++e) {
        const std::size_t block = (r % k) * k + (c % k);
        out[((r / k) * ow + c / k) * och + block * ch + e] = src.at(r, c, e);
      }
    }
  }
  return TokenGrid(FeatureMap(oh, ow, och, std::move(out)), g.provenance(),
                   g.k_applied() * k, g.interpolated() || resize);
}

VideoTokenTensor temporal_pool(const VideoTokenTensor& v, std::size_t ratio) {
  if (ratio == 0) throw InvalidArgument("temporal pool ratio must be positive");
  if (ratio == 1) return v;
  const auto& first = v.frame(0).tokens();
  std::vector<TokenGrid> pooled;
  for (std::size_t begin = 0; begin < v.frames(); begin += ratio) {
    const std::size_t end = std::min(v.frames(), begin + ratio);
    const double inv = 1.0 / static_cast<double>(end - begin);
    std::vector<float> out(first.size());
    for (std::size_t e = 0; e < out.size(); ++e) {
      double acc = 0.0;
      for (std::size_t t = begin; t < end; ++t) acc += v.frame(t).tokens().data()[e];
      out[e] = static_cast<float>(acc * inv);
    }
    pooled.emplace_back(
        FeatureMap(first.height(), first.width(), first.channels(), std::move(out)),
        Provenance::kVideoFrame, v.frame(0).k_applied(), v.frame(0).interpolated());
  }
  return VideoTokenTensor(std::move(pooled));
}

std::vector<double> delta_scores(std::span<const SampleRecord> records,
                                 Aggregation agg) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(delta_score(r, agg));
  return out;
}

QuantizedTensor quantize(std::span<const double> values,
                         std::span<const std::size_t> shape,
                         const QuantSpec& spec) {
  const std::size_t units = unit_count(shape, spec);
  if (values.size() != [&] {
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        return n;
      }()) {
    throw InvalidArgument("value count does not match the tensor shape");
  }
  QuantizedTensor q;
  q.spec = spec;
  q.shape.assign(shape.begin(), shape.end());
  q.codes.resize(values.size());
  q.scales.assign(units, 0.0f);

  std::vector<double> pos(units, 0.0), neg(units, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InvalidArgument("cannot quantize non-finite values");
    }
    const std::size_t u = unit_of(i, shape, spec);
    pos[u] = std::max(pos[u], values[i]);
    neg[u] = std::max(neg[u], -values[i]);
  }
  auto to_scale = [](double s) {
    auto f = static_cast<float>(s);
    if (s > 0.0 && f == 0.0f) f = std::numeric_limits<float>::denorm_min();
    return f;
  };
  for (std::size_t u = 0; u < units; ++u) {
    switch (spec.format) {
      case QuantFormat::kFp8E4M3: q.scales[u] = 1.0f; break;
      case QuantFormat::kInt8Symmetric:
        q.scales[u] = to_scale(std::max(pos[u], neg[u]) / 127.0);
        break;
      case QuantFormat::kInt4Group:
        q.scales[u] = to_scale(std::max(pos[u] / 7.0, neg[u] / 8.0));
        break;
    }
  }
  const double lo = spec.format == QuantFormat::kInt4Group ? -8.0 : -127.0;
  const double hi = spec.format == QuantFormat::kInt4Group ? 7.0 : 127.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (spec.format == QuantFormat::kFp8E4M3) {
      q.codes[i] = static_cast<std::int8_t>(fp8::encode_e4m3(values[i]));
      continue;
    }
    const float s = q.scales[unit_of(i, shape, spec)];
    q.codes[i] = s == 0.0f ? std::int8_t{0}
                           : static_cast<std::int8_t>(std::clamp(
                                 std::nearbyint(values[i] / static_cast<double>(s)), lo, hi));
  }
  return q;
}

}  // namespace tokscale::reference
