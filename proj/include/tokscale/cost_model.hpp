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

// Analytic prefill/decode accounting for a decoder-only LLM fed by a tiled
// vision encoder. All numbers are model predictions, not measurements.
//
// Conventions (one multiply-accumulate = 2 FLOPs):
//   prefill attention  4 * layers * tokens^2 * hidden
//                      (QK^T and AV, each 2 * tokens^2 * head_dim per head)
//   prefill linear     2 * tokens * layers * per_layer_weights
//                      (q, k, v, o, gate, up, down; LM head excluded)
//   encoder            tiles * encoder_flops_per_tile
//   decode per token   2 * (layers * per_layer_weights + vocab * hidden)
//                      + 4 * layers * context * hidden
//   weight traffic     every linear matrix plus the LM head is read once per
//                      decoded token; the embedding table is a row lookup
//                      and is not counted
//   KV cache           2 (K and V) * layers * context * kv_dim * 2 bytes

#ifndef TOKSCALE_COST_MODEL_HPP_
#define TOKSCALE_COST_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tokscale/quant_sim.hpp"

namespace tokscale {

struct ModelShape {
  std::uint64_t layers = 28;
  std::uint64_t hidden = 3584;
  std::uint64_t heads = 28;
  std::uint64_t kv_heads = 4;
  std::uint64_t intermediate = 18944;
  std::uint64_t vocab = 152064;
  std::uint64_t encoder_flops_per_tile = 0;

  void validate() const;
  std::uint64_t head_dim() const { return hidden / heads; }
  std::uint64_t kv_dim() const { return kv_heads * head_dim(); }
};

// Forward FLOPs of a plain transformer encoder over `tokens` tokens:
// layers * (2 * tokens * (4 h^2 + 2 h * intermediate) + 4 * tokens^2 * h).
std::uint64_t transformer_encoder_flops(std::uint64_t tokens, std::uint64_t layers,
                                        std::uint64_t hidden,
                                        std::uint64_t intermediate);

struct WeightMatrix {
  std::string name;
  std::uint64_t rows;  // output features
  std::uint64_t cols;  // input features
  std::uint64_t count;  // instances (layers, or 1 for the LM head)
};

std::vector<WeightMatrix> weight_matrices(const ModelShape& shape);

// nullopt = 16-bit baseline.
using WeightFormat = std::optional<QuantSpec>;

// Bits to store one matrix, codes plus one f32 per scale unit when
// `scale_overhead` is set.
std::uint64_t matrix_bits(const WeightMatrix& m, const WeightFormat& fmt,
                          bool scale_overhead = true);

struct CostReport {
  std::uint64_t visual_tokens = 0;
  std::uint64_t tiles = 0;
  std::uint64_t prefill_attention_flops = 0;
  std::uint64_t prefill_linear_flops = 0;
  std::uint64_t encoder_flops = 0;
  std::uint64_t decode_flops_per_token = 0;
  std::uint64_t weight_bits_per_token = 0;
  std::uint64_t kv_cache_bytes = 0;
  std::uint64_t context = 0;
  std::string weight_format = "fp16";

  double weight_bytes_per_token() const {
    return static_cast<double>(weight_bits_per_token) / 8.0;
  }
  std::uint64_t prefill_flops() const {
    return prefill_attention_flops + prefill_linear_flops + encoder_flops;
  }
  friend bool operator==(const CostReport&, const CostReport&) = default;
};

CostReport prefill_cost(std::uint64_t tokens, const ModelShape& shape,
                        std::uint64_t tiles = 0);

struct DecodeOptions {
  bool scale_overhead = true;
};

CostReport decode_cost(const ModelShape& shape, const WeightFormat& fmt,
                       std::uint64_t context, const DecodeOptions& opts = {});

// Prefill and decode fields of one configuration in a single report.
CostReport full_cost(std::uint64_t tokens, std::uint64_t tiles,
                     const ModelShape& shape, const WeightFormat& fmt,
                     std::uint64_t context);

// grid_side^2 * ceil(frames / pool_ratio).
std::uint64_t video_budget(std::uint64_t frames, std::uint64_t pool_ratio,
                           std::uint64_t grid_side);

std::string weight_format_name(const WeightFormat& fmt);

}  // namespace tokscale

#endif  // TOKSCALE_COST_MODEL_HPP_
