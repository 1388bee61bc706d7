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

// Internal helpers shared by the parallel kernels and the serial reference.

#ifndef TOKSCALE_SRC_SAMPLING_HPP_
#define TOKSCALE_SRC_SAMPLING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace tokscale::detail {

struct AxisSample {
  std::size_t lo;
  std::size_t hi;
  double frac;  // weight of `hi`
};

// Half-pixel source coordinate for output index `dst`, clamped to the border.
inline AxisSample sample_axis(std::size_t dst, std::size_t in_len,
                              std::size_t out_len) {
  const double scale = static_cast<double>(in_len) / static_cast<double>(out_len);
  double x = (static_cast<double>(dst) + 0.5) * scale - 0.5;
  if (x < 0.0) x = 0.0;
  auto lo = static_cast<std::size_t>(std::floor(x));
  if (lo > in_len - 1) lo = in_len - 1;
  const std::size_t hi = std::min(lo + 1, in_len - 1);
  double frac = x - static_cast<double>(lo);
  if (hi == lo) frac = 0.0;
  return {lo, hi, frac};
}

inline float blend(float v00, float v01, float v10, float v11, double fy,
                   double fx) {
  const double top = (1.0 - fx) * v00 + fx * v01;
  const double bottom = (1.0 - fx) * v10 + fx * v11;
  return static_cast<float>((1.0 - fy) * top + fy * bottom);
}

}  // namespace tokscale::detail

#endif  // TOKSCALE_SRC_SAMPLING_HPP_
