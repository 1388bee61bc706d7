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

// Quantize/dequantize simulation of deployment number formats.
//
//   int8-symmetric  scale = max|x| / 127, codes in [-127, 127]
//   int4-group      scale = max(max(x, 0) / 7, max(-x, 0) / 8),
//                   codes in [-8, 7], zero-point 0
//   fp8-e4m3        direct cast, round to nearest even, saturating at +-448
//
// Tensors are viewed as [shape[0], ..., shape[n-1]]. per-channel means one
// scale per index of the outermost axis (output channels of a weight
// matrix); per-group means groups of G consecutive elements along the
// innermost axis. Scales are stored as f32.

#ifndef TOKSCALE_QUANT_SIM_HPP_
#define TOKSCALE_QUANT_SIM_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tokscale/tensor.hpp"

namespace tokscale {

enum class QuantFormat { kInt8Symmetric, kInt4Group, kFp8E4M3 };
enum class Granularity { kPerTensor, kPerChannel, kPerGroup };

struct QuantSpec {
  QuantFormat format = QuantFormat::kInt8Symmetric;
  Granularity granularity = Granularity::kPerChannel;
  std::size_t group_size = 128;
  // Permit a short final group when group_size does not divide the row.
  bool allow_ragged = false;

  static QuantSpec int8_per_tensor() {
    return {QuantFormat::kInt8Symmetric, Granularity::kPerTensor, 0, false};
  }
  static QuantSpec int8_per_channel() {
    return {QuantFormat::kInt8Symmetric, Granularity::kPerChannel, 0, false};
  }
  static QuantSpec int4_group(std::size_t g, bool ragged = false) {
    return {QuantFormat::kInt4Group, Granularity::kPerGroup, g, ragged};
  }
  static QuantSpec fp8_e4m3() {
    return {QuantFormat::kFp8E4M3, Granularity::kPerTensor, 0, false};
  }

  // Code width in bits.
  unsigned bits() const;
  friend bool operator==(const QuantSpec&, const QuantSpec&) = default;
};

const char* to_string(QuantFormat f);
const char* to_string(Granularity g);
QuantFormat parse_quant_format(const std::string& s);
Granularity parse_granularity(const std::string& s);

struct QuantizedTensor {
  QuantSpec spec;
  std::vector<std::size_t> shape;
  // int8/int4: signed code value; fp8: the raw bit pattern.
  std::vector<std::int8_t> codes;
  std::vector<float> scales;  // one per unit; 1.0 for fp8
};

QuantizedTensor quantize(std::span<const double> values,
                         std::span<const std::size_t> shape,
                         const QuantSpec& spec);
QuantizedTensor quantize(const FeatureMap& m, const QuantSpec& spec);

// Exact code * scale in double. Throws CorruptTensor on out-of-range codes,
// fp8 NaN patterns or bad scales.
std::vector<double> dequantize(const QuantizedTensor& q);

// Index of the scale unit that owns each element, plus the unit count.
std::size_t unit_count(std::span<const std::size_t> shape, const QuantSpec& spec);
std::size_t unit_of(std::size_t flat_index, std::span<const std::size_t> shape,
                    const QuantSpec& spec);

struct QuantErrorReport {
  double max_abs_err = 0.0;
  double rmse = 0.0;
  std::size_t units = 0;
  double scale_min = 0.0;
  double scale_max = 0.0;
  double scale_mean = 0.0;
  std::size_t zero_units = 0;
};

QuantErrorReport quant_error_report(std::span<const double> values,
                                    std::span<const std::size_t> shape,
                                    const QuantSpec& spec);

namespace fp8 {

inline constexpr double kMax = 448.0;

// Round to nearest even with saturation; NaN throws InvalidArgument.
std::uint8_t encode_e4m3(double x);
// NaN codes (0x7F, 0xFF) throw CorruptTensor.
double decode_e4m3(std::uint8_t bits);
bool is_nan_e4m3(std::uint8_t bits);

}  // namespace fp8

// Container: "NVQ1", u32 LE header length, JSON header
// {format, granularity, shape, group_size, ragged, codes, code_bytes,
// scales}, codes (int8 and fp8: 1 byte each; int4: two per byte, low nibble
// first), then f32 LE scales.
void write_quantized(std::ostream& os, const QuantizedTensor& q);
QuantizedTensor read_quantized(std::istream& is);

}  // namespace tokscale

#endif  // TOKSCALE_QUANT_SIM_HPP_
