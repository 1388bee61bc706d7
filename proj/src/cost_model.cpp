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

#include "tokscale/cost_model.hpp"

#include <limits>

#include "tokscale/error.hpp"

namespace tokscale {

namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw InvalidArgument("cost model overflow: configuration too large");
  }
  return r;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) {
    throw InvalidArgument("cost model overflow: configuration too large");
  }
  return r;
}

std::uint64_t per_layer_weights(const ModelShape& s) {
  std::uint64_t w = 0;
  for (const auto& m : weight_matrices(s)) {
    if (m.count == s.layers) w = add(w, mul(m.rows, m.cols));
  }
  return w;
}

}  // namespace

void ModelShape::validate() const {
  if (layers == 0 || hidden == 0 || heads == 0 || kv_heads == 0 ||
      intermediate == 0 || vocab == 0) {
    throw InvalidArgument("model shape fields must be positive");
  }
  if (hidden % heads != 0) throw InvalidArgument("hidden must be divisible by heads");
  if (heads % kv_heads != 0) {
    throw InvalidArgument("heads must be divisible by kv_heads");
  }
}

std::uint64_t transformer_encoder_flops(std::uint64_t tokens, std::uint64_t layers,
                                        std::uint64_t hidden,
                                        std::uint64_t intermediate) {
  const std::uint64_t weights =
      add(mul(4, mul(hidden, hidden)), mul(2, mul(hidden, intermediate)));
  const std::uint64_t linear = mul(2, mul(tokens, weights));
  const std::uint64_t attn = mul(4, mul(mul(tokens, tokens), hidden));
  return mul(layers, add(linear, attn));
}

std::vector<WeightMatrix> weight_matrices(const ModelShape& s) {
  s.validate();
  const std::uint64_t h = s.hidden, kv = s.kv_dim(), f = s.intermediate;
  return {
      {"q_proj", h, h, s.layers},    {"k_proj", kv, h, s.layers},
      {"v_proj", kv, h, s.layers},   {"o_proj", h, h, s.layers},
      {"gate_proj", f, h, s.layers}, {"up_proj", f, h, s.layers},
      {"down_proj", h, f, s.layers}, {"lm_head", s.vocab, h, 1},
  };
}

std::uint64_t matrix_bits(const WeightMatrix& m, const WeightFormat& fmt,
                          bool scale_overhead) {
  const std::uint64_t elems = mul(m.rows, m.cols);
  if (!fmt) return mul(m.count, mul(elems, 16));
  std::uint64_t bits = mul(elems, fmt->bits());
  if (scale_overhead) {
    std::uint64_t units = 1;
    switch (fmt->granularity) {
      case Granularity::kPerTensor: units = 1; break;
      case Granularity::kPerChannel: units = m.rows; break;
      case Granularity::kPerGroup: {
        if (fmt->group_size == 0) throw InvalidArgument("group size must be positive");
        units = mul(m.rows, (m.cols + fmt->group_size - 1) / fmt->group_size);
        break;
      }
    }
    bits = add(bits, mul(units, 32));
  }
  return mul(m.count, bits);
}

CostReport prefill_cost(std::uint64_t tokens, const ModelShape& shape,
                        std::uint64_t tiles) {
  shape.validate();
  if (tokens == 0) throw InvalidArgument("prefill needs at least one token");
  CostReport r;
  r.visual_tokens = tokens;
  r.tiles = tiles;
  r.prefill_attention_flops =
      mul(4, mul(shape.layers, mul(mul(tokens, tokens), shape.hidden)));
  r.prefill_linear_flops =
      mul(2, mul(tokens, mul(shape.layers, per_layer_weights(shape))));
  r.encoder_flops = mul(tiles, shape.encoder_flops_per_tile);
  return r;
}

CostReport decode_cost(const ModelShape& shape, const WeightFormat& fmt,
                       std::uint64_t context, const DecodeOptions& opts) {
  shape.validate();
  CostReport r;
  r.context = context;
  r.weight_format = weight_format_name(fmt);
  std::uint64_t weights = 0;
  for (const auto& m : weight_matrices(shape)) {
    weights = add(weights, mul(m.count, mul(m.rows, m.cols)));
    r.weight_bits_per_token =
        add(r.weight_bits_per_token, matrix_bits(m, fmt, opts.scale_overhead));
  }
  r.decode_flops_per_token =
      add(mul(2, weights), mul(4, mul(shape.layers, mul(context, shape.hidden))));
  r.kv_cache_bytes = mul(2, mul(shape.layers, mul(context, mul(shape.kv_dim(), 2))));
  return r;
}

CostReport full_cost(std::uint64_t tokens, std::uint64_t tiles,
                     const ModelShape& shape, const WeightFormat& fmt,
                     std::uint64_t context) {
  CostReport r = prefill_cost(tokens, shape, tiles);
  const CostReport d = decode_cost(shape, fmt, context);
  r.context = d.context;
  r.weight_format = d.weight_format;
  r.decode_flops_per_token = d.decode_flops_per_token;
  r.weight_bits_per_token = d.weight_bits_per_token;
  r.kv_cache_bytes = d.kv_cache_bytes;
  return r;
}

std::uint64_t video_budget(std::uint64_t frames, std::uint64_t pool_ratio,
                           std::uint64_t grid_side) {
  if (frames == 0) throw InvalidArgument("video needs at least one frame");
  if (pool_ratio == 0) throw InvalidArgument("pool ratio must be positive");
  return mul(mul(grid_side, grid_side), (frames + pool_ratio - 1) / pool_ratio);
}

std::string weight_format_name(const WeightFormat& fmt) {
  if (!fmt) return "fp16";
  std::string name = to_string(fmt->format);
  name += "/";
  name += to_string(fmt->granularity);
  if (fmt->granularity == Granularity::kPerGroup) {
    name += ":" + std::to_string(fmt->group_size);
  }
  return name;
}

}  // namespace tokscale
